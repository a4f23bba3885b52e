//! Per-element, per-axis cell entropy linear program.

use crate::discretization::SubcellFluxes;
use crate::error::{Result, SolverError};
use crate::mesh::Mesh;
use crate::operators::{Axis, OperatorSet};

use super::greedy::LpInstance;

/// Assembled entropy LP together with the two scalars it is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyLp {
    pub lp: LpInstance,
    /// `v^T Δ^vol f̄^L`, entropy production of the low-order fluxes.
    pub low_production: f64,
    /// `1^T B ψ`, the potential flux through the element boundary.
    pub potential_flux: f64,
}

fn dot<const NC: usize>(a: &[f64; NC], b: &[f64; NC]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_lines c (ψ_N - ψ_0)`.
pub fn potential_flux(mesh: &Mesh, ops: &OperatorSet, axis: Axis, psi: &[f64]) -> f64 {
    let n = mesh.degree;
    (0..mesh.lines_per_element())
        .map(|line| {
            let c = mesh.line_weight(ops, axis, line);
            c * (psi[mesh.line_node(axis, line, n)] - psi[mesh.line_node(axis, line, 0)])
        })
        .sum()
}

/// Build the LP `a^T l ≤ b, 0 ≤ l ≤ U` for one element and axis, with
/// `a_i = (v_{i-1} - v_i)^T (f̄^H_i - f̄^L_i)` and
/// `b = bound_scale · (1^T B ψ - v^T Δ^vol f̄^L)`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_entropy_lp<const NC: usize>(
    mesh: &Mesh,
    ops: &OperatorSet,
    axis: Axis,
    element: usize,
    v: &[[f64; NC]],
    psi: &[f64],
    fluxes: &SubcellFluxes<NC>,
    bound_scale: f64,
    upper: Vec<f64>,
) -> Result<EntropyLp> {
    let n = mesh.degree;
    let stride = n + 2;
    let lines = mesh.lines_per_element();
    let mut coefficients = Vec::with_capacity(lines * n);
    let mut low_production = 0.0;
    let mut magnitude = 0.0;
    for line in 0..lines {
        for i in 1..=n {
            let va = &v[mesh.line_node(axis, line, i - 1)];
            let vb = &v[mesh.line_node(axis, line, i)];
            let mut jump = [0.0; NC];
            let mut diff = [0.0; NC];
            let k = line * stride + i;
            for c in 0..NC {
                jump[c] = va[c] - vb[c];
                diff[c] = fluxes.high[k][c] - fluxes.low[k][c];
                magnitude += (va[c].abs() + vb[c].abs()) * fluxes.low[k][c].abs();
            }
            coefficients.push(dot(&jump, &diff));
            low_production += dot(&jump, &fluxes.low[k]);
        }
    }
    let potential_flux = potential_flux(mesh, ops, axis, psi);
    magnitude += (0..lines)
        .map(|line| {
            let c = mesh.line_weight(ops, axis, line);
            c * (psi[mesh.line_node(axis, line, n)].abs() + psi[mesh.line_node(axis, line, 0)].abs())
        })
        .sum::<f64>();
    let bound = bound_scale * (potential_flux - low_production);
    if !bound.is_finite() || coefficients.iter().any(|a| !a.is_finite()) {
        return Err(SolverError::NonFinite {
            what: "entropy linear program",
            element,
        });
    }
    if upper.len() != coefficients.len() {
        return Err(SolverError::Contract(format!(
            "{} upper bounds for {} limiting factors",
            upper.len(),
            coefficients.len()
        )));
    }
    Ok(EntropyLp {
        lp: LpInstance {
            coefficients,
            bound,
            upper,
            magnitude: bound_scale.abs() * magnitude,
        },
        low_production,
        potential_flux,
    })
}

/// `v^T Δ^vol f̄(l)` for the blended subcell fluxes
/// `f̄(l) = f̄^L + l (f̄^H - f̄^L)`.
pub fn volume_entropy_production<const NC: usize>(
    mesh: &Mesh,
    axis: Axis,
    v: &[[f64; NC]],
    fluxes: &SubcellFluxes<NC>,
    factors: &[f64],
) -> f64 {
    let n = mesh.degree;
    let stride = n + 2;
    let mut total = 0.0;
    for line in 0..mesh.lines_per_element() {
        for i in 1..=n {
            let va = &v[mesh.line_node(axis, line, i - 1)];
            let vb = &v[mesh.line_node(axis, line, i)];
            let l = factors[line * n + i - 1];
            let k = line * stride + i;
            for c in 0..NC {
                let f = fluxes.low[k][c] + l * (fluxes.high[k][c] - fluxes.low[k][c]);
                total += (va[c] - vb[c]) * f;
            }
        }
    }
    total
}
