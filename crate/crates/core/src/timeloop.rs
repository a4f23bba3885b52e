//! SSPRK(3,3) time integration of the limited semi-discretization.

use rayon::prelude::*;
use thiserror::Error;

use crate::diagnostics::{record_step, DiagnosticsRecord};
use crate::discretization::{Discretization, ElementField, FaceTable, LineScratch};
use crate::error::{Result, SolverError};
use crate::limiter::{limit_element, LimiterConfig, StageContext};
use crate::models::ConservationLaw;

/// Time-integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub final_time: f64,
    pub cfl_safety: f64,
    /// Sorted times at which the field is saved.
    pub snapshot_times: Vec<f64>,
}

impl TimeConfig {
    pub fn new(final_time: f64) -> Self {
        TimeConfig {
            final_time,
            cfl_safety: 1.0,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(SolverError::config("time.final", "must be a finite non-negative time"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety.is_finite()) {
            return Err(SolverError::config("time.cfl_safety", "must be positive"));
        }
        if self
            .snapshot_times
            .iter()
            .any(|s| !(*s >= 0.0 && *s <= self.final_time))
            || self.snapshot_times.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(SolverError::config(
                "output.snapshot_times",
                "must be increasing and within [0, time.final]",
            ));
        }
        Ok(())
    }
}

/// Stage-level limiter statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    /// Max over elements and axes of `v^T Δ^vol f̄ - 1^T B ψ`.
    pub max_entropy_residual: f64,
    /// Max violation of the bound actually enforced (differs from the
    /// residual only when `β > 0`).
    pub max_bound_violation: f64,
    /// Elements with at least one factor below one.
    pub limited_elements: usize,
    pub fallbacks: usize,
    /// Smallest factor of every element.
    pub min_factors: Vec<f64>,
}

/// `Δt = safety · ½ min_i m_i / (2 λ_i)` with `λ_i = Σ_k ½ c (λ_left + λ_right)`,
/// the row sum of the low-order graph viscosity plus the face wavespeed.
pub fn cfl_dt<M, const NC: usize>(
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    faces: &FaceTable<NC>,
) -> Result<f64>
where
    M: ConservationLaw<NC>,
{
    let mesh = &disc.mesh;
    let n = mesh.degree;
    let npe = mesh.nodes_per_element();
    let per_element: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let elem = field.element(e);
            let mut lambda = vec![0.0; npe];
            for &axis in disc.axes() {
                let normal = axis.unit_normal();
                for line in 0..mesh.lines_per_element() {
                    let c = mesh.line_weight(&disc.ops, axis, line);
                    let (lo, hi) = disc.line_face_fluxes(faces, e, axis, line);
                    lambda[mesh.line_node(axis, line, 0)] += 0.5 * c * lo.wavespeed;
                    lambda[mesh.line_node(axis, line, n)] += 0.5 * c * hi.wavespeed;
                    for k in 0..n {
                        let (a, b) = (mesh.line_node(axis, line, k), mesh.line_node(axis, line, k + 1));
                        let l = disc.model.max_wavespeed(&elem[a], &elem[b], normal);
                        lambda[a] += 0.5 * c * l;
                        lambda[b] += 0.5 * c * l;
                    }
                }
            }
            (0..npe)
                .map(|k| 0.5 * mesh.node_mass(&disc.ops, k) / (2.0 * lambda[k]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let dt = per_element.into_iter().fold(f64::INFINITY, f64::min);
    if dt.is_nan() || dt <= 0.0 {
        return Err(SolverError::NonFinite {
            what: "time step",
            element: 0,
        });
    }
    Ok(dt)
}

/// One SSPRK(3,3) step in Shu-Osher form. `rate(u, k)` returns
/// `M^-1 r(u)` at stage `k ∈ {0, 1, 2}`.
pub fn ssprk33_step<const NC: usize, F>(
    u: &ElementField<NC>,
    dt: f64,
    mut rate: F,
) -> Result<ElementField<NC>>
where
    F: FnMut(&ElementField<NC>, usize) -> Result<Vec<[f64; NC]>>,
{
    let euler = |base: &ElementField<NC>, l: &[[f64; NC]]| -> ElementField<NC> {
        let mut out = base.clone();
        for (o, r) in out.values.iter_mut().zip(l) {
            for c in 0..NC {
                o[c] += dt * r[c];
            }
        }
        out
    };
    let blend = |a: f64, x: &ElementField<NC>, b: f64, y: &ElementField<NC>| -> ElementField<NC> {
        let mut out = x.clone();
        for (o, v) in out.values.iter_mut().zip(&y.values) {
            for c in 0..NC {
                o[c] = a * o[c] + b * v[c];
            }
        }
        out
    };
    let u1 = euler(u, &rate(u, 0)?);
    let u2 = blend(0.75, u, 0.25, &euler(&u1, &rate(&u1, 1)?));
    let u3 = blend(1.0 / 3.0, u, 2.0 / 3.0, &euler(&u2, &rate(&u2, 2)?));
    Ok(u3)
}

/// Limited rate `M^-1 r` of every node at one stage.
pub fn evaluate_stage<M, const NC: usize>(
    disc: &Discretization<M, NC>,
    config: &LimiterConfig,
    field: &ElementField<NC>,
    faces: &FaceTable<NC>,
    dt: f64,
    phi_global: f64,
) -> Result<(Vec<[f64; NC]>, StageReport)>
where
    M: ConservationLaw<NC>,
{
    let ctx = StageContext {
        disc,
        config,
        field,
        faces,
        dt,
        phi_global,
    };
    let mesh = &disc.mesh;
    let npe = mesh.nodes_per_element();
    let inverse_mass: Vec<f64> = (0..npe).map(|k| 1.0 / mesh.node_mass(&disc.ops, k)).collect();
    let mut rate = vec![[0.0; NC]; field.values.len()];
    let summaries: Vec<Result<(f64, f64, f64, usize)>> = rate
        .par_chunks_mut(npe)
        .enumerate()
        .map_init(
            || (LineScratch::new(mesh.degree), disc.subcell_storage()),
            |(scratch, fluxes), (e, out)| {
                disc.element_subcell_fluxes(field, faces, e, scratch, fluxes)?;
                let lim = limit_element(&ctx, e, fluxes)?;
                disc.limited_element_residual(fluxes, &lim.factors, out)?;
                for (r, w) in out.iter_mut().zip(&inverse_mass) {
                    for v in r.iter_mut() {
                        *v *= w;
                    }
                }
                Ok((lim.entropy_residual, lim.bound_violation, lim.min_factor, lim.fallbacks))
            },
        )
        .collect();
    let mut report = StageReport {
        max_entropy_residual: f64::NEG_INFINITY,
        max_bound_violation: f64::NEG_INFINITY,
        limited_elements: 0,
        fallbacks: 0,
        min_factors: Vec::with_capacity(summaries.len()),
    };
    for s in summaries {
        let (residual, violation, min_factor, fallbacks) = s?;
        report.max_entropy_residual = report.max_entropy_residual.max(residual);
        report.max_bound_violation = report.max_bound_violation.max(violation);
        if min_factor < 1.0 {
            report.limited_elements += 1;
        }
        report.fallbacks += fallbacks;
        report.min_factors.push(min_factor);
    }
    Ok((rate, report))
}

/// A saved field.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<const NC: usize> {
    pub time: f64,
    pub field: ElementField<NC>,
    /// Smallest limiting factor per element at the last stage before the
    /// snapshot.
    pub min_factors: Vec<f64>,
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput<const NC: usize> {
    pub field: ElementField<NC>,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot<NC>>,
    /// Per-element smallest factors at the final stage.
    pub min_factors: Vec<f64>,
    pub steps: usize,
    pub fallbacks: usize,
}

/// A failed run, carrying the last valid state.
#[derive(Debug, Error)]
#[error("run aborted at t = {time} after {steps} steps: {source}")]
pub struct RunFailure<const NC: usize> {
    pub time: f64,
    pub steps: usize,
    pub last_state: ElementField<NC>,
    pub records: Vec<DiagnosticsRecord>,
    #[source]
    pub source: SolverError,
}

/// Advance `initial` to the final time.
pub struct Integrator<'a, M, const NC: usize> {
    pub disc: &'a Discretization<M, NC>,
    pub limiter: &'a LimiterConfig,
    pub time: &'a TimeConfig,
    /// Global minimum of `φ` used by the relaxed minimum-entropy bound.
    pub phi_global: f64,
}

impl<M, const NC: usize> Integrator<'_, M, NC>
where
    M: ConservationLaw<NC>,
{
    /// Run to `time.final_time`, recording one diagnostics row per step.
    pub fn advance(
        &self,
        initial: ElementField<NC>,
    ) -> std::result::Result<RunOutput<NC>, Box<RunFailure<NC>>> {
        let disc = self.disc;
        let final_time = self.time.final_time;
        let mut u = initial;
        let mut t = 0.0;
        let mut steps = 0;
        let mut records = Vec::new();
        let mut snapshots = Vec::new();
        let mut next_snapshot = 0;
        let mut min_factors = vec![1.0; disc.mesh.num_elements()];
        let mut fallbacks = 0;

        let fail = |source: SolverError, t: f64, steps: usize, u: &ElementField<NC>, records: &[DiagnosticsRecord]| {
            Box::new(RunFailure {
                time: t,
                steps,
                last_state: u.clone(),
                records: records.to_vec(),
                source,
            })
        };
        let take_snapshots = |t: f64, u: &ElementField<NC>, mins: &[f64], next: &mut usize, out: &mut Vec<Snapshot<NC>>| {
            while *next < self.time.snapshot_times.len() && self.time.snapshot_times[*next] <= t {
                out.push(Snapshot {
                    time: t,
                    field: u.clone(),
                    min_factors: mins.to_vec(),
                });
                *next += 1;
            }
        };
        take_snapshots(t, &u, &min_factors, &mut next_snapshot, &mut snapshots);

        while t < final_time {
            let faces = match disc.face_table(&u) {
                Ok(f) => f,
                Err(err) => return Err(fail(err, t, steps, &u, &records)),
            };
            let mut dt = match cfl_dt(disc, &u, &faces) {
                Ok(dt) => dt * self.time.cfl_safety,
                Err(err) => return Err(fail(err, t, steps, &u, &records)),
            };
            let mut target = final_time;
            if let Some(s) = self.time.snapshot_times.get(next_snapshot) {
                target = target.min(*s);
            }
            let last = target - t <= dt;
            if last {
                dt = target - t;
            }

            let mut stage_faces = Some(faces);
            let mut reports = Vec::with_capacity(3);
            let stepped = ssprk33_step(&u, dt, |stage_u, k| {
                let faces = match stage_faces.take() {
                    Some(f) => f,
                    None => disc.face_table(stage_u).map_err(|e| e.at_stage(k))?,
                };
                let (rate, report) =
                    evaluate_stage(disc, self.limiter, stage_u, &faces, dt, self.phi_global)
                        .map_err(|e| e.at_stage(k + 1))?;
                reports.push(report);
                Ok(rate)
            })
            .and_then(|next| {
                disc.check_admissible(&next).map_err(|e| e.at_stage(3))?;
                Ok(next)
            });
            let next = match stepped {
                Ok(next) => next,
                Err(err) => return Err(fail(err, t, steps, &u, &records)),
            };
            u = next;
            t = if last { target } else { t + dt };
            steps += 1;
            let last_report = reports.last().expect("three stages ran");
            min_factors.clone_from(&last_report.min_factors);
            fallbacks += reports.iter().map(|r| r.fallbacks).sum::<usize>();
            records.push(record_step(disc, &u, t, dt, &reports));
            take_snapshots(t, &u, &min_factors, &mut next_snapshot, &mut snapshots);
        }
        Ok(RunOutput {
            field: u,
            records,
            snapshots,
            min_factors,
            steps,
            fallbacks,
        })
    }
}
