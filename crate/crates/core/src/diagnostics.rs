//! Error norms, conservation totals, entropy residuals and convergence
//! rates.

use log::warn;

use crate::discretization::{Discretization, ElementField, LineScratch};
use crate::error::Result;
use crate::limiter::{potential_flux, volume_entropy_production};
use crate::models::ConservationLaw;
use crate::timeloop::StageReport;

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    /// `Σ m_i u_i` per component.
    pub totals: Vec<f64>,
    /// `Σ m_i η(u_i)`.
    pub entropy: f64,
    /// Max over the three stages of the per-element, per-axis entropy
    /// residual.
    pub max_entropy_residual: f64,
    pub max_bound_violation: f64,
    /// Min density and min pressure for Euler; min and max of `u` for
    /// scalar models.
    pub extrema: [f64; 2],
    /// Elements with some factor below one at the final stage.
    pub limited_elements: usize,
    pub fallbacks: usize,
}

/// Column names of the two extrema in [`DiagnosticsRecord::extrema`].
pub fn extrema_names<M, const NC: usize>(model: &M) -> [&'static str; 2]
where
    M: ConservationLaw<NC>,
{
    if model.gas().is_some() {
        ["min_rho", "min_p"]
    } else {
        ["min_u", "max_u"]
    }
}

/// Min density and pressure, or min and max of a scalar.
pub fn field_extrema<M, const NC: usize>(model: &M, field: &ElementField<NC>) -> [f64; 2]
where
    M: ConservationLaw<NC>,
{
    match model.gas() {
        Some(gas) => field.values.iter().fold([f64::INFINITY; 2], |acc, u| {
            [acc[0].min(u[0]), acc[1].min(gas.pressure(u))]
        }),
        None => field
            .values
            .iter()
            .fold([f64::INFINITY, f64::NEG_INFINITY], |acc, u| {
                [acc[0].min(u[0]), acc[1].max(u[0])]
            }),
    }
}

/// `Σ m_i η(u_i)`.
pub fn total_entropy<M, const NC: usize>(disc: &Discretization<M, NC>, field: &ElementField<NC>) -> f64
where
    M: ConservationLaw<NC>,
{
    let npe = field.nodes_per_element;
    field
        .values
        .iter()
        .enumerate()
        .map(|(k, u)| disc.mesh.node_mass(&disc.ops, k % npe) * disc.model.entropy(u))
        .sum()
}

pub(crate) fn record_step<M, const NC: usize>(
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    t: f64,
    dt: f64,
    reports: &[StageReport],
) -> DiagnosticsRecord
where
    M: ConservationLaw<NC>,
{
    let last = reports.last();
    DiagnosticsRecord {
        t,
        dt,
        totals: field.totals(&disc.mesh, &disc.ops).to_vec(),
        entropy: total_entropy(disc, field),
        max_entropy_residual: reports
            .iter()
            .map(|r| r.max_entropy_residual)
            .fold(f64::NEG_INFINITY, f64::max),
        max_bound_violation: reports
            .iter()
            .map(|r| r.max_bound_violation)
            .fold(f64::NEG_INFINITY, f64::max),
        extrema: field_extrema(&disc.model, field),
        limited_elements: last.map_or(0, |r| r.limited_elements),
        fallbacks: reports.iter().map(|r| r.fallbacks).sum(),
    }
}

/// `Σ m_i |u_i|` per component, the scale against which conservation
/// drift is measured (totals such as momentum may vanish).
pub fn total_magnitudes<M, const NC: usize>(disc: &Discretization<M, NC>, field: &ElementField<NC>) -> [f64; NC]
where
    M: ConservationLaw<NC>,
{
    let npe = field.nodes_per_element;
    let mut out = [0.0; NC];
    for (k, u) in field.values.iter().enumerate() {
        let m = disc.mesh.node_mass(&disc.ops, k % npe);
        for c in 0..NC {
            out[c] += m * u[c].abs();
        }
    }
    out
}

/// Largest `|total_c(t) - total_c(0)| / max(|total_c(0)|, scale_c)` over
/// all records and components.
pub fn conservation_drift(initial: &[f64], scale: &[f64], records: &[DiagnosticsRecord]) -> f64 {
    records
        .iter()
        .flat_map(|r| {
            r.totals
                .iter()
                .zip(initial.iter().zip(scale))
                .map(|(t, (t0, s))| (t - t0).abs() / t0.abs().max(*s))
        })
        .fold(0.0, f64::max)
}

/// Sum over components of `sqrt(1^T M (u - u_exact)^2) / sqrt(1^T M u_exact^2)`.
/// Components whose exact solution vanishes identically are skipped.
pub fn l2_error<M, const NC: usize>(
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    exact: impl Fn([f64; 2]) -> [f64; NC],
) -> f64
where
    M: ConservationLaw<NC>,
{
    let mesh = &disc.mesh;
    let npe = field.nodes_per_element;
    let mut diff = [0.0; NC];
    let mut norm = [0.0; NC];
    for (k, u) in field.values.iter().enumerate() {
        let (e, n) = (k / npe, k % npe);
        let m = mesh.node_mass(&disc.ops, n);
        let ue = exact(mesh.node_position(&disc.ops, e, n));
        for c in 0..NC {
            diff[c] += m * (u[c] - ue[c]).powi(2);
            norm[c] += m * ue[c] * ue[c];
        }
    }
    let names = disc.model.component_names();
    (0..NC)
        .filter(|&c| {
            let keep = norm[c] > 0.0;
            if !keep {
                warn!("component `{}` has a zero exact norm; excluded from the error", names[c]);
            }
            keep
        })
        .map(|c| (diff[c] / norm[c]).sqrt())
        .sum()
}

/// `v^T Δ^vol_k f̄_k(l) - 1^T B_k ψ_k` for every element and axis, with
/// the given limiting factors (`factors[e][axis]`, `N` per line).
pub fn entropy_residuals<M, const NC: usize>(
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    factors: &[Vec<Vec<f64>>],
) -> Result<Vec<Vec<f64>>>
where
    M: ConservationLaw<NC>,
{
    let faces = disc.face_table(field)?;
    let mut scratch = LineScratch::new(disc.mesh.degree);
    let mut fluxes = disc.subcell_storage();
    let mut out = Vec::with_capacity(field.num_elements());
    for (e, element_factors) in factors.iter().enumerate().take(field.num_elements()) {
        disc.element_subcell_fluxes(field, &faces, e, &mut scratch, &mut fluxes)?;
        let state = field.element(e);
        let v: Vec<[f64; NC]> = state.iter().map(|u| disc.model.entropy_variables(u)).collect();
        let residuals = disc
            .axes()
            .iter()
            .enumerate()
            .map(|(a, &axis)| {
                let psi: Vec<f64> = state.iter().map(|u| disc.model.entropy_potential(u, axis)).collect();
                volume_entropy_production(&disc.mesh, axis, &v, &fluxes[a], &element_factors[a])
                    - potential_flux(&disc.mesh, &disc.ops, axis, &psi)
            })
            .collect();
        out.push(residuals);
    }
    Ok(out)
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub elements: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(K / K_prev)` against the previous row of the
    /// same degree; `log2(e_K / e_2K)` for doubling sequences.
    pub rate: Option<f64>,
}

/// Attach observed rates to `(degree, K, error)` triples, ordered by degree
/// and then by `K`.
pub fn convergence_rates(runs: &[(usize, usize, f64)]) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(runs.len());
    for &(degree, elements, error) in runs {
        let rate = rows
            .last()
            .filter(|prev| prev.degree == degree && prev.elements < elements)
            .map(|prev| (prev.error / error).ln() / (elements as f64 / prev.elements as f64).ln());
        rows.push(ConvergenceRow {
            degree,
            elements,
            error,
            rate,
        });
    }
    rows
}
