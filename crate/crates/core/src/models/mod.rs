//! Conservation-law models: physical fluxes, entropy pairs, wavespeeds and
//! the local Lax-Friedrichs numerical flux.

mod euler;
mod kpp;

pub use euler::{
    conservative_from_primitive, davis_wavespeed, euler_entropy_quantities, euler_flux,
    primitive_from_conservative, specific_entropy_phi, EntropyQuantities, Euler1d, Euler2d,
    IdealGas,
};
pub use kpp::Kpp;

use crate::error::{Result, SolverError};
use crate::operators::Axis;

/// A system `u_t + div f(u) = 0` with `NC` components and a convex entropy.
///
/// Methods are infallible; callers check [`ConservationLaw::is_admissible`]
/// before evaluating on untrusted states.
pub trait ConservationLaw<const NC: usize>: Send + Sync {
    /// Spatial dimension (1 or 2).
    const DIM: usize;

    fn flux(&self, u: &[f64; NC], axis: Axis) -> [f64; NC];

    /// Upper estimate of the largest wavespeed of the Riemann problem
    /// `(ul, ur)` in direction `normal`.
    fn max_wavespeed(&self, ul: &[f64; NC], ur: &[f64; NC], normal: [f64; 2]) -> f64;

    fn entropy(&self, u: &[f64; NC]) -> f64;

    /// `v = dη/du`.
    fn entropy_variables(&self, u: &[f64; NC]) -> [f64; NC];

    /// `ψ_k = v^T f_k - F_k`.
    fn entropy_potential(&self, u: &[f64; NC], axis: Axis) -> f64;

    fn is_admissible(&self, u: &[f64; NC]) -> bool;

    /// Ideal-gas view used by the density and energy constraints, `None`
    /// for scalar models.
    fn gas(&self) -> Option<IdealGas> {
        None
    }

    /// Column names of the conservative components.
    fn component_names(&self) -> &'static [&'static str];

    fn check(&self, u: &[f64; NC]) -> Result<()> {
        if self.is_admissible(u) {
            Ok(())
        } else {
            Err(SolverError::InadmissibleState { state: u.to_vec() })
        }
    }

    /// `f(u) · n`.
    fn normal_flux(&self, u: &[f64; NC], normal: [f64; 2]) -> [f64; NC] {
        let mut out = [0.0; NC];
        for axis in Axis::active(Self::DIM) {
            let nk = normal[axis.index()];
            if nk != 0.0 {
                let f = self.flux(u, *axis);
                for c in 0..NC {
                    out[c] += nk * f[c];
                }
            }
        }
        out
    }
}

/// Local Lax-Friedrichs flux `½ (f(uL) + f(uR))·n - ½ λ (uR - uL)`.
pub fn llf_flux<M, const NC: usize>(
    model: &M,
    ul: &[f64; NC],
    ur: &[f64; NC],
    normal: [f64; 2],
) -> Result<[f64; NC]>
where
    M: ConservationLaw<NC>,
{
    model.check(ul)?;
    model.check(ur)?;
    Ok(llf_flux_unchecked(model, ul, ur, normal).0)
}

/// LLF flux and the wavespeed used, without admissibility checks.
pub(crate) fn llf_flux_unchecked<M, const NC: usize>(
    model: &M,
    ul: &[f64; NC],
    ur: &[f64; NC],
    normal: [f64; 2],
) -> ([f64; NC], f64)
where
    M: ConservationLaw<NC>,
{
    let lambda = model.max_wavespeed(ul, ur, normal);
    let fl = model.normal_flux(ul, normal);
    let fr = model.normal_flux(ur, normal);
    let mut out = [0.0; NC];
    for c in 0..NC {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * lambda * (ur[c] - ul[c]);
    }
    (out, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn llf_consistency_and_antisymmetry() {
        let model = Euler2d::new(1.4);
        let u = conservative_from_primitive(&model.ideal, &[1.2, 0.3, -0.2, 0.9]);
        let f = llf_flux(&model, &u, &u, [1.0, 0.0]).unwrap();
        assert_eq!(f, model.flux(&u, Axis::X));

        let w = conservative_from_primitive(&model.ideal, &[0.4, -0.7, 0.1, 0.3]);
        let n = [0.6, 0.8];
        let a = llf_flux(&model, &u, &w, n).unwrap();
        let b = llf_flux(&model, &w, &u, [-0.6, -0.8]).unwrap();
        for c in 0..4 {
            assert!((a[c] + b[c]).abs() < 1e-14);
        }
    }

    #[test]
    fn kpp_llf_hand_value() {
        let f = llf_flux(&Kpp, &[0.0], &[std::f64::consts::PI], [1.0, 0.0]).unwrap();
        assert!((f[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn llf_rejects_inadmissible() {
        let model = Euler1d::new(1.4);
        let bad = [-1.0, 0.0, 1.0];
        let good = [1.0, 0.0, 2.5];
        assert!(llf_flux(&model, &bad, &good, [1.0, 0.0]).is_err());
    }
}
