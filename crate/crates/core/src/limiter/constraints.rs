//! Convex-constraint upper bounds on the limiting factors.
//!
//! The limited update of a node is an average of `2d` substates, one per
//! subcell interface touching the node. Each substate is affine in the
//! factor of its interface, `w(l) = w_0 + l·δ`, so each constraint yields
//! an upper bound on that factor.

use std::fmt;
use std::str::FromStr;

use crate::error::SolverError;
use crate::models::IdealGas;

/// Which convex constraints bound the limiting factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    #[default]
    None,
    /// Relaxed positivity of density and internal energy.
    Positivity,
    /// Two-sided density bounds from the low-order update plus relaxed
    /// internal-energy positivity.
    Tvd,
    /// Local minimum principle on `φ = ρ^(1-γ) e` plus relaxed positivity.
    MinEntropy,
    /// Minimum principle relaxed toward the global minimum by smoothness.
    MinEntropyRelaxed,
}

impl ConstraintMode {
    pub fn uses_gas(self) -> bool {
        self != ConstraintMode::None
    }
}

impl FromStr for ConstraintMode {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ConstraintMode::None),
            "positivity" => Ok(ConstraintMode::Positivity),
            "tvd" => Ok(ConstraintMode::Tvd),
            "minentropy" => Ok(ConstraintMode::MinEntropy),
            "minentropy_relaxed" => Ok(ConstraintMode::MinEntropyRelaxed),
            other => Err(SolverError::config(
                "limiter.constraints",
                format!(
                    "`{other}` is not one of none, positivity, tvd, minentropy, minentropy_relaxed"
                ),
            )),
        }
    }
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::None => "none",
            ConstraintMode::Positivity => "positivity",
            ConstraintMode::Tvd => "tvd",
            ConstraintMode::MinEntropy => "minentropy",
            ConstraintMode::MinEntropyRelaxed => "minentropy_relaxed",
        })
    }
}

/// Bisection steps for the minimum-entropy bound.
pub const BISECTION_STEPS: usize = 40;

/// Largest `l ∈ [0, l_max]` with `lo ≤ value + l·slope ≤ hi`.
pub fn linear_bound_factor(value: f64, slope: f64, lo: f64, hi: f64, l_max: f64) -> f64 {
    let mut l = l_max;
    if slope < 0.0 && lo.is_finite() {
        l = l.min((value - lo) / -slope);
    }
    if slope > 0.0 && hi.is_finite() {
        l = l.min((hi - value) / slope);
    }
    l.clamp(0.0, l_max)
}

fn kinetic_terms(base: &[f64], dir: &[f64]) -> (f64, f64, f64) {
    let nc = base.len();
    let mut m0m0 = 0.0;
    let mut m0dm = 0.0;
    let mut dmdm = 0.0;
    for d in 1..nc - 1 {
        m0m0 += base[d] * base[d];
        m0dm += base[d] * dir[d];
        dmdm += dir[d] * dir[d];
    }
    (m0m0, m0dm, dmdm)
}

/// Largest `l ∈ [0, l_max]` keeping `ρe(w_0 + l δ) ≥ floor`, assuming the
/// density stays positive on `[0, l_max]`.
///
/// Multiplying by `ρ(l)` turns the condition into the quadratic
/// `g(l) = ρ(l) (E(l) - floor) - ½|m(l)|² ≥ 0`; the bound is its smallest
/// positive root.
pub fn internal_energy_factor(base: &[f64], dir: &[f64], floor: f64, l_max: f64) -> f64 {
    let nc = base.len();
    let (rho0, drho) = (base[0], dir[0]);
    let (e0, de) = (base[nc - 1] - floor, dir[nc - 1]);
    let (m0m0, m0dm, dmdm) = kinetic_terms(base, dir);
    let a = drho * de - 0.5 * dmdm;
    let b = drho * e0 + rho0 * de - m0dm;
    let c = rho0 * e0 - 0.5 * m0m0;
    if c < 0.0 || (c == 0.0 && b < 0.0) {
        return 0.0;
    }
    let scale = a.abs().max(b.abs()).max(c.abs());
    let roots: [f64; 2] = if a.abs() <= 1e-14 * scale {
        if b < 0.0 {
            [-c / b, f64::INFINITY]
        } else {
            [f64::INFINITY; 2]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            [f64::INFINITY; 2]
        } else {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q == 0.0 {
                [f64::INFINITY; 2]
            } else {
                [q / a, c / q]
            }
        }
    };
    let first = roots
        .iter()
        .copied()
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min);
    first.min(l_max).max(0.0)
}

/// Outcome of the minimum-entropy bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyFactor {
    pub factor: f64,
    /// The substate at `l = 0` already violated the bound.
    pub fallback: bool,
}

/// Largest `l ∈ [0, l_max]` (to bisection accuracy) with
/// `φ(w_0 + l δ) ≥ bound` and an admissible substate.
pub fn min_entropy_factor(
    gas: &IdealGas,
    base: &[f64],
    dir: &[f64],
    bound: f64,
    l_max: f64,
) -> EntropyFactor {
    let mut w = base.to_vec();
    let mut feasible = |l: f64| {
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = base[k] + l * dir[k];
        }
        gas.is_admissible(&w) && gas.phi(&w) >= bound
    };
    if !feasible(0.0) {
        return EntropyFactor {
            factor: 0.0,
            fallback: true,
        };
    }
    if feasible(l_max) {
        return EntropyFactor {
            factor: l_max,
            fallback: false,
        };
    }
    let (mut lo, mut hi) = (0.0, l_max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    EntropyFactor {
        factor: lo,
        fallback: false,
    }
}

/// Per-node bounds used by the substate constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBounds {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_floor: f64,
    pub rhoe_floor: f64,
    pub phi_min: f64,
}

/// Bound on the factor of one substate `w_0 + l δ` under `mode`.
pub fn substate_factor(
    mode: ConstraintMode,
    gas: &IdealGas,
    base: &[f64],
    dir: &[f64],
    bounds: &NodeBounds,
    l_max: f64,
) -> EntropyFactor {
    let mut l = l_max;
    match mode {
        ConstraintMode::None => {}
        ConstraintMode::Tvd => {
            l = linear_bound_factor(base[0], dir[0], bounds.rho_min, bounds.rho_max, l);
        }
        _ => {
            l = linear_bound_factor(base[0], dir[0], bounds.rho_floor, f64::INFINITY, l);
        }
    }
    if mode == ConstraintMode::None {
        return EntropyFactor {
            factor: l,
            fallback: false,
        };
    }
    l = internal_energy_factor(base, dir, bounds.rhoe_floor, l);
    match mode {
        ConstraintMode::MinEntropy | ConstraintMode::MinEntropyRelaxed => {
            min_entropy_factor(gas, base, dir, bounds.phi_min, l)
        }
        _ => EntropyFactor {
            factor: l,
            fallback: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::conservative_from_primitive;

    const GAS: IdealGas = IdealGas { gamma: 1.4 };

    fn rhoe(u: &[f64]) -> f64 {
        GAS.internal_energy(u)
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [
            ConstraintMode::None,
            ConstraintMode::Positivity,
            ConstraintMode::Tvd,
            ConstraintMode::MinEntropy,
            ConstraintMode::MinEntropyRelaxed,
        ] {
            assert_eq!(m.to_string().parse::<ConstraintMode>().unwrap(), m);
        }
        assert!("bogus".parse::<ConstraintMode>().is_err());
    }

    #[test]
    fn zero_direction_is_unconstrained() {
        let base = conservative_from_primitive(&GAS, &[1.0, 0.3, 1.0]);
        let bounds = NodeBounds {
            rho_min: 1.0,
            rho_max: 1.0,
            rho_floor: 0.5,
            rhoe_floor: 0.5 * rhoe(&base),
            phi_min: GAS.phi(&base),
        };
        for mode in [
            ConstraintMode::Positivity,
            ConstraintMode::Tvd,
            ConstraintMode::MinEntropy,
        ] {
            let f = substate_factor(mode, &GAS, &base, &[0.0; 3], &bounds, 1.0);
            assert_eq!(f.factor, 1.0, "{mode}");
        }
    }

    #[test]
    fn density_bound_hits_half() {
        // ρ(l) = 1 - l: relaxed floor 0.5 is reached at l = 0.5
        let base = conservative_from_primitive(&GAS, &[1.0, 0.0, 1.0]);
        let l = linear_bound_factor(base[0], -1.0, 0.5 * base[0], f64::INFINITY, 1.0);
        assert!((l - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tvd_overshoot_sits_on_bound() {
        let (rho, slope, rho_max) = (1.0, 0.37, 1.1);
        let l = linear_bound_factor(rho, slope, 0.9, rho_max, 1.0);
        assert!(l < 1.0);
        assert!((rho + l * slope - rho_max).abs() < 1e-12);
    }

    #[test]
    fn tvd_bounds_from_neighbours() {
        let rhos = [0.9, 1.0, 1.1];
        let lo = rhos.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (0.9, 1.1));
        // substate starting inside the bounds with no correction is feasible
        assert_eq!(linear_bound_factor(1.0, 0.0, lo, hi, 1.0), 1.0);
    }

    #[test]
    fn internal_energy_root_by_substitution() {
        let base = conservative_from_primitive(&GAS, &[1.0, 0.5, 1.0]);
        let dir = [0.1, 0.8, -3.0];
        let floor = 0.5 * rhoe(&base);
        let l = internal_energy_factor(&base, &dir, floor, 1.0);
        assert!(l > 0.0 && l < 1.0);
        let w: Vec<f64> = (0..3).map(|k| base[k] + l * dir[k]).collect();
        assert!((rhoe(&w) - floor).abs() < 1e-12);
        // just below the root the constraint holds
        let w: Vec<f64> = (0..3).map(|k| base[k] + 0.99 * l * dir[k]).collect();
        assert!(rhoe(&w) > floor);
    }

    #[test]
    fn already_positive_update_is_unconstrained() {
        let base = conservative_from_primitive(&GAS, &[1.0, 0.1, 1.0]);
        let dir = [0.05, 0.01, 0.2];
        let w: Vec<f64> = (0..3).map(|k| base[k] + dir[k]).collect();
        assert!(GAS.is_admissible(&w));
        let bounds = NodeBounds {
            rho_min: 0.0,
            rho_max: f64::INFINITY,
            rho_floor: 0.0,
            rhoe_floor: 0.0,
            phi_min: 0.0,
        };
        let f = substate_factor(ConstraintMode::Positivity, &GAS, &base, &dir, &bounds, 1.0);
        assert_eq!(f.factor, 1.0);
    }

    #[test]
    fn bisection_residual_is_small() {
        let base = conservative_from_primitive(&GAS, &[1.0, 0.2, 1.0]);
        let dir = [0.3, 0.0, -0.9];
        let bound = GAS.phi(&base) * 0.8;
        let f = min_entropy_factor(&GAS, &base, &dir, bound, 1.0);
        assert!(!f.fallback);
        let w: Vec<f64> = (0..3).map(|k| base[k] + f.factor * dir[k]).collect();
        let r = GAS.phi(&w) - bound;
        assert!(f.factor == 0.0 || f.factor == 1.0 || r.abs() < 1e-10, "{r:e}");
    }

    #[test]
    fn constant_state_min_entropy_is_free() {
        let base = conservative_from_primitive(&GAS, &[1.0, 0.2, 1.0]);
        let f = min_entropy_factor(&GAS, &base, &[0.0; 3], GAS.phi(&base), 1.0);
        assert_eq!(f.factor, 1.0);
    }

    #[test]
    fn violated_base_falls_back() {
        let base = conservative_from_primitive(&GAS, &[1.0, 0.2, 1.0]);
        let f = min_entropy_factor(&GAS, &base, &[0.0; 3], 2.0 * GAS.phi(&base), 1.0);
        assert!(f.fallback);
        assert_eq!(f.factor, 0.0);
    }
}
