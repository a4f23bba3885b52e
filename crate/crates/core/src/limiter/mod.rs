//! Subcell limiting: entropy linear program, convex constraints, shock
//! capturing and the per-element limiting loop.

mod constraints;
mod entropy_lp;
mod greedy;
mod smoothness;

pub use constraints::{
    internal_energy_factor, linear_bound_factor, min_entropy_factor, substate_factor,
    ConstraintMode, EntropyFactor, NodeBounds, BISECTION_STEPS,
};
pub use entropy_lp::{assemble_entropy_lp, potential_flux, volume_entropy_production, EntropyLp};
pub use greedy::{
    greedy_solve, greedy_solve_into, InfeasibleBound, LpInstance, BOUND_TOLERANCE,
    GREEDY_TOLERANCE,
};
pub use smoothness::{
    blending_alpha, blending_sharpness, blending_threshold, modal_coefficients, modal_smoothness,
    ramp_center, smoothness_indicator, smoothness_ramp, RAMP_WIDTH, SMOOTHNESS_FLOOR,
};

use crate::discretization::{Discretization, ElementField, FaceTable, SubcellFluxes};
use crate::error::{Result, SolverError};
use crate::models::ConservationLaw;
use crate::operators::Axis;

/// User-facing limiter settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterConfig {
    pub entropy: bool,
    pub beta: f64,
    pub constraints: ConstraintMode,
    pub relax: f64,
    pub blending: bool,
    /// Use the low-order scheme everywhere (all factors zero).
    pub low_order_only: bool,
    pub greedy_tolerance: f64,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        LimiterConfig {
            entropy: true,
            beta: 0.0,
            constraints: ConstraintMode::None,
            relax: 0.5,
            blending: false,
            low_order_only: false,
            greedy_tolerance: GREEDY_TOLERANCE,
        }
    }
}

impl LimiterConfig {
    /// Plain DGSEM: no entropy LP, no constraints, no blending.
    pub fn unlimited() -> Self {
        LimiterConfig {
            entropy: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(SolverError::config("limiter.beta", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.relax) {
            return Err(SolverError::config("limiter.relax", "must lie in [0, 1)"));
        }
        if !(self.greedy_tolerance > 0.0) {
            return Err(SolverError::config("limiter.greedy_tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Limiting result for one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementLimiting {
    /// Factors per axis, `N` per line, line-major.
    pub factors: Vec<Vec<f64>>,
    /// Max over axes of `v^T Δ^vol f̄(l) - 1^T B ψ`.
    pub entropy_residual: f64,
    /// Max over axes of `v^T Δ^vol f̄(l) - (1^T B ψ - (1 - βε)(1^T B ψ - v^T Δ^vol f̄^L))`,
    /// the violation of the enforced bound.
    pub bound_violation: f64,
    pub smoothness: f64,
    pub min_factor: f64,
    /// Substates whose low-order value already violated the entropy bound.
    pub fallbacks: usize,
}

/// Read-only inputs shared by every element of one stage.
pub struct StageContext<'a, M, const NC: usize> {
    pub disc: &'a Discretization<M, NC>,
    pub config: &'a LimiterConfig,
    pub field: &'a ElementField<NC>,
    pub faces: &'a FaceTable<NC>,
    pub dt: f64,
    /// Global minimum of `φ` at the initial time.
    pub phi_global: f64,
}

impl<M, const NC: usize> StageContext<'_, M, NC>
where
    M: ConservationLaw<NC>,
{
    fn node_bounds(
        &self,
        e: usize,
        low_update: &[[f64; NC]],
        smoothness: f64,
    ) -> Result<Vec<NodeBounds>> {
        let disc = self.disc;
        let mesh = &disc.mesh;
        let gas = disc.model.gas().ok_or_else(|| {
            SolverError::config("limiter.constraints", "convex constraints need an ideal gas model")
        })?;
        let state = self.field.element(e);
        let n = mesh.degree;
        let np = n + 1;
        let relax = self.config.relax;
        let mode = self.config.constraints;
        let mut bounds: Vec<NodeBounds> = low_update
            .iter()
            .zip(state)
            .map(|(ul, u)| NodeBounds {
                rho_min: ul[0],
                rho_max: ul[0],
                rho_floor: relax * ul[0],
                rhoe_floor: relax * gas.internal_energy(ul),
                phi_min: gas.phi(u),
            })
            .collect();
        for &axis in disc.axes() {
            for line in 0..mesh.lines_per_element() {
                for k in 0..np {
                    let node = mesh.line_node(axis, line, k);
                    let mut include = |other_low: &[f64; NC], other: &[f64; NC]| {
                        let b = &mut bounds[node];
                        b.rho_min = b.rho_min.min(other_low[0]);
                        b.rho_max = b.rho_max.max(other_low[0]);
                        b.phi_min = b.phi_min.min(gas.phi(other));
                    };
                    if k > 0 {
                        let j = mesh.line_node(axis, line, k - 1);
                        include(&low_update[j], &state[j]);
                    }
                    if k < n {
                        let j = mesh.line_node(axis, line, k + 1);
                        include(&low_update[j], &state[j]);
                    }
                    // the low-order update at face nodes also draws on the
                    // state across the face
                    let face = if k == 0 {
                        Some(disc.line_face_fluxes(self.faces, e, axis, line).0.left)
                    } else if k == n {
                        Some(disc.line_face_fluxes(self.faces, e, axis, line).1.right)
                    } else {
                        None
                    };
                    if let Some(exterior) = face {
                        let b = &mut bounds[node];
                        b.phi_min = b.phi_min.min(gas.phi(&exterior));
                    }
                }
            }
        }
        if mode == ConstraintMode::MinEntropyRelaxed {
            for b in bounds.iter_mut() {
                b.phi_min = smoothness * b.phi_min + (1.0 - smoothness) * self.phi_global;
            }
        }
        Ok(bounds)
    }

    /// Low-order forward-Euler update `u + Δt M^-1 Σ_k Δ_k f̄^L_k`.
    fn low_order_update(&self, e: usize, fluxes: &[SubcellFluxes<NC>]) -> Vec<[f64; NC]> {
        let disc = self.disc;
        let mesh = &disc.mesh;
        let n = mesh.degree;
        let stride = n + 2;
        let mut out: Vec<[f64; NC]> = self.field.element(e).to_vec();
        for (&axis, f) in disc.axes().iter().zip(fluxes) {
            for line in 0..mesh.lines_per_element() {
                for k in 0..=n {
                    let node = mesh.line_node(axis, line, k);
                    let scale = self.dt / mesh.node_mass(&disc.ops, node);
                    let (lo, hi) = (&f.low[line * stride + k], &f.low[line * stride + k + 1]);
                    for c in 0..NC {
                        out[node][c] += scale * (hi[c] - lo[c]);
                    }
                }
            }
        }
        out
    }

    fn constraint_factors(
        &self,
        axis: Axis,
        fluxes: &SubcellFluxes<NC>,
        low_update: &[[f64; NC]],
        bounds: &[NodeBounds],
        fallbacks: &mut usize,
    ) -> Result<Vec<f64>> {
        let disc = self.disc;
        let mesh = &disc.mesh;
        let n = mesh.degree;
        let stride = n + 2;
        let gas = disc.model.gas().ok_or_else(|| {
            SolverError::config("limiter.constraints", "convex constraints need an ideal gas model")
        })?;
        let substates = 2.0 * mesh.dim as f64;
        let mode = self.config.constraints;
        let mut upper = Vec::with_capacity(mesh.lines_per_element() * n);
        let mut dir = [0.0; NC];
        for line in 0..mesh.lines_per_element() {
            for i in 1..=n {
                let a = mesh.line_node(axis, line, i - 1);
                let b = mesh.line_node(axis, line, i);
                let k = line * stride + i;
                let mut l = 1.0;
                for (node, sign) in [(a, 1.0), (b, -1.0)] {
                    let scale = sign * substates * self.dt / mesh.node_mass(&disc.ops, node);
                    for c in 0..NC {
                        dir[c] = scale * (fluxes.high[k][c] - fluxes.low[k][c]);
                    }
                    let f = substate_factor(mode, &gas, &low_update[node], &dir, &bounds[node], l);
                    if f.fallback {
                        *fallbacks += 1;
                    }
                    l = f.factor;
                }
                upper.push(l);
            }
        }
        Ok(upper)
    }
}

/// Compute limiting factors for element `e` (entropy LP, convex
/// constraints, shock capturing).
pub fn limit_element<M, const NC: usize>(
    ctx: &StageContext<'_, M, NC>,
    e: usize,
    fluxes: &[SubcellFluxes<NC>],
) -> Result<ElementLimiting>
where
    M: ConservationLaw<NC>,
{
    let disc = ctx.disc;
    let config = ctx.config;
    let mesh = &disc.mesh;
    let ops = &disc.ops;
    let n = mesh.degree;
    let per_axis = mesh.lines_per_element() * n;
    let state = ctx.field.element(e);

    let density: Vec<f64> = state.iter().map(|u| u[0]).collect();
    let smoothness = modal_smoothness(ops, &density, mesh.dim);
    let bound_scale = 1.0 - config.beta * smoothness;
    let cap = if config.blending {
        1.0 - blending_alpha(smoothness, n)
    } else {
        1.0
    };

    let v: Vec<[f64; NC]> = state.iter().map(|u| disc.model.entropy_variables(u)).collect();
    let mut psi = vec![0.0; state.len()];

    let mut fallbacks = 0;
    let constrained = config.constraints != ConstraintMode::None && !config.low_order_only;
    let (low_update, bounds) = if constrained {
        let low_update = ctx.low_order_update(e, fluxes);
        if let Some(k) = low_update.iter().position(|u| !disc.model.is_admissible(u)) {
            return Err(SolverError::Admissibility {
                element: e,
                node: k,
                stage: None,
                state: low_update[k].to_vec(),
            });
        }
        let bounds = ctx.node_bounds(e, &low_update, smoothness)?;
        (low_update, bounds)
    } else {
        (Vec::new(), Vec::new())
    };

    let mut result = ElementLimiting {
        factors: Vec::with_capacity(disc.axes().len()),
        entropy_residual: f64::NEG_INFINITY,
        bound_violation: f64::NEG_INFINITY,
        smoothness,
        min_factor: 1.0,
        fallbacks: 0,
    };
    for (a, &axis) in disc.axes().iter().enumerate() {
        for (p, u) in psi.iter_mut().zip(state) {
            *p = disc.model.entropy_potential(u, axis);
        }
        let upper = if constrained {
            ctx.constraint_factors(axis, &fluxes[a], &low_update, &bounds, &mut fallbacks)?
        } else {
            vec![1.0; per_axis]
        };
        let lp = assemble_entropy_lp(mesh, ops, axis, e, &v, &psi, &fluxes[a], bound_scale, upper)?;
        let mut factors = if config.low_order_only {
            vec![0.0; per_axis]
        } else if config.entropy {
            greedy_solve(&lp.lp, config.greedy_tolerance).map_err(|err| SolverError::Infeasible {
                element: e,
                axis: a,
                bound: err.bound,
            })?
        } else {
            lp.lp.upper.clone()
        };
        if cap < 1.0 {
            for l in factors.iter_mut() {
                *l = l.min(cap);
            }
        }
        let production = volume_entropy_production(mesh, axis, &v, &fluxes[a], &factors);
        result.entropy_residual = result.entropy_residual.max(production - lp.potential_flux);
        let enforced = lp.low_production + lp.lp.bound;
        result.bound_violation = result.bound_violation.max(production - enforced);
        result.min_factor = factors.iter().copied().fold(result.min_factor, f64::min);
        result.factors.push(factors);
    }
    result.fallbacks = fallbacks;
    Ok(result)
}
