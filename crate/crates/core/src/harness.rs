//! Problem cases, single runs and convergence studies.

use std::path::{Path, PathBuf};

use log::info;

use crate::config::RunConfig;
use crate::diagnostics::{convergence_rates, l2_error, ConvergenceRow};
use crate::discretization::{Discretization, ElementField};
use crate::error::{Result, SolverError};
use crate::limiter::LimiterConfig;
use crate::mesh::{BoundaryCondition, Mesh};
use crate::models::{conservative_from_primitive, ConservationLaw, Euler1d, Euler2d, Kpp};
use crate::operators::build_operator_set;
use crate::output::{self, write_run, WrittenRun};
use crate::problems::{
    astro_jet_initial, kelvin_helmholtz_initial, kpp_initial, sod_exact, sod_initial, AstroJetBoundary,
    KppBoundary, Periodic, ProblemKind, SodBoundary, Vortex,
};
use crate::timeloop::{Integrator, RunFailure, RunOutput, TimeConfig};

/// Exact solution `u(x, t)`.
pub type ExactSolution<const NC: usize> = Box<dyn Fn([f64; 2], f64) -> [f64; NC] + Send + Sync>;

/// A discretized problem with its initial state.
pub struct Case<M, const NC: usize> {
    pub disc: Discretization<M, NC>,
    pub initial: ElementField<NC>,
    /// Minimum of `φ` over the initial nodes (0 for scalar models).
    pub phi_global: f64,
    pub exact: Option<ExactSolution<NC>>,
    pub plot_range: Option<(f64, f64)>,
}

impl<M, const NC: usize> Case<M, NC>
where
    M: ConservationLaw<NC>,
{
    fn build(
        kind: ProblemKind,
        model: M,
        degree: usize,
        kx: usize,
        ky: usize,
        boundary: Box<dyn BoundaryCondition<NC>>,
        init: impl Fn([f64; 2]) -> [f64; NC],
    ) -> Result<Self> {
        let setup = kind.setup();
        let mesh = Mesh::new(setup.dim, degree, kx, ky, setup.x_range, setup.y_range, setup.periodic)?;
        let disc = Discretization::new(model, build_operator_set(degree)?, mesh, boundary)?;
        let initial = ElementField::from_fn(&disc.mesh, &disc.ops, init);
        disc.check_admissible(&initial)?;
        let phi_global = match disc.model.gas() {
            Some(gas) => initial
                .values
                .iter()
                .map(|u| gas.phi(u))
                .fold(f64::INFINITY, f64::min),
            None => 0.0,
        };
        Ok(Case {
            disc,
            initial,
            phi_global,
            exact: None,
            plot_range: setup.plot_range,
        })
    }

    /// Run to `time.final_time` with `limiter`.
    pub fn simulate(
        &self,
        limiter: &LimiterConfig,
        time: &TimeConfig,
    ) -> std::result::Result<RunOutput<NC>, Box<RunFailure<NC>>> {
        Integrator {
            disc: &self.disc,
            limiter,
            time,
            phi_global: self.phi_global,
        }
        .advance(self.initial.clone())
    }

    /// Relative L2 error against the exact solution at time `t`.
    pub fn error(&self, field: &ElementField<NC>, t: f64) -> Result<f64> {
        let exact = self.exact.as_ref().ok_or_else(|| {
            SolverError::config("problem.name", "this problem has no exact solution")
        })?;
        Ok(l2_error(&self.disc, field, |x| exact(x, t)))
    }
}

pub fn sod_case(gamma: f64, degree: usize, k: usize) -> Result<Case<Euler1d, 3>> {
    let model = Euler1d::new(gamma);
    let gas = model.ideal;
    let mut case = Case::build(ProblemKind::Sod, model, degree, k, 1, Box::new(SodBoundary { gas }), |x| {
        sod_initial(&gas, x)
    })?;
    case.exact = Some(Box::new(move |x, t| {
        conservative_from_primitive(&gas, &sod_exact(gas.gamma, x[0], t))
    }));
    Ok(case)
}

pub fn kpp_case(degree: usize, kx: usize, ky: usize) -> Result<Case<Kpp, 1>> {
    Case::build(ProblemKind::Kpp, Kpp, degree, kx, ky, Box::new(KppBoundary), kpp_initial)
}

pub fn vortex_case(gamma: f64, degree: usize, kx: usize, ky: usize) -> Result<Case<Euler2d, 4>> {
    let model = Euler2d::new(gamma);
    let gas = model.ideal;
    let vortex = Vortex::default();
    let mut case = Case::build(ProblemKind::Vortex, model, degree, kx, ky, Box::new(Periodic), |x| {
        vortex.state(&gas, x, 0.0)
    })?;
    case.exact = Some(Box::new(move |x, t| vortex.state(&gas, x, t)));
    Ok(case)
}

pub fn kelvin_helmholtz_case(gamma: f64, degree: usize, kx: usize, ky: usize) -> Result<Case<Euler2d, 4>> {
    let model = Euler2d::new(gamma);
    let gas = model.ideal;
    Case::build(ProblemKind::KelvinHelmholtz, model, degree, kx, ky, Box::new(Periodic), |x| {
        kelvin_helmholtz_initial(&gas, x)
    })
}

pub fn astro_jet_case(gamma: f64, degree: usize, kx: usize, ky: usize) -> Result<Case<Euler2d, 4>> {
    let model = Euler2d::new(gamma);
    let gas = model.ideal;
    Case::build(ProblemKind::AstroJet, model, degree, kx, ky, Box::new(AstroJetBoundary { gas }), |x| {
        astro_jet_initial(&gas, x)
    })
}

/// Outcome of a completed `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub written: WrittenRun,
    /// Relative L2 error when the problem has an exact solution.
    pub error: Option<f64>,
    pub fallbacks: usize,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SolverError::config("time.workers", e.to_string()))
}

fn gamma_of(config: &RunConfig) -> f64 {
    config.gamma.unwrap_or(1.4)
}

fn run_case<M, const NC: usize>(case: Case<M, NC>, config: &RunConfig) -> Result<RunSummary>
where
    M: ConservationLaw<NC>,
{
    let dir = &config.output_dir;
    match case.simulate(&config.limiter, &config.time) {
        Ok(out) => {
            let written = write_run(dir, &case.disc, &out.field, &out.records, &out.snapshots, case.plot_range)?;
            let error = match case.exact {
                Some(_) => Some(case.error(&out.field, config.time.final_time)?),
                None => None,
            };
            Ok(RunSummary {
                steps: out.steps,
                final_time: config.time.final_time,
                written,
                error,
                fallbacks: out.fallbacks,
            })
        }
        Err(failure) => Err(dump_failure(dir, &case, *failure)),
    }
}

/// Write the last valid state and the diagnostics so far, and turn the
/// failure into an error naming the dump.
fn dump_failure<M, const NC: usize>(dir: &Path, case: &Case<M, NC>, failure: RunFailure<NC>) -> SolverError
where
    M: ConservationLaw<NC>,
{
    let dump = dir.join("fields_failure.csv");
    let written = write_run(dir, &case.disc, &failure.last_state, &failure.records, &[], case.plot_range)
        .and_then(|w| {
            std::fs::rename(&w.fields, &dump).map_err(|e| SolverError::io(&w.fields, e))
        });
    SolverError::Aborted {
        time: failure.time,
        steps: failure.steps,
        dump: written.map(|_| dump).unwrap_or_else(|_| PathBuf::from("<not written>")),
        source: Box::new(failure.source),
    }
}

/// Run the configured problem once and write its outputs.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let (n, kx, ky) = (config.degree, config.kx, config.ky);
    let gamma = gamma_of(config);
    info!("{} with N = {n}, {kx} x {ky} elements", config.problem);
    pool(config.workers)?.install(|| match config.problem {
        ProblemKind::Sod => run_case(sod_case(gamma, n, kx)?, config),
        ProblemKind::Kpp => run_case(kpp_case(n, kx, ky)?, config),
        ProblemKind::Vortex => run_case(vortex_case(gamma, n, kx, ky)?, config),
        ProblemKind::KelvinHelmholtz => run_case(kelvin_helmholtz_case(gamma, n, kx, ky)?, config),
        ProblemKind::AstroJet => run_case(astro_jet_case(gamma, n, kx, ky)?, config),
    })
}

fn final_error<M, const NC: usize>(case: Case<M, NC>, config: &RunConfig) -> Result<f64>
where
    M: ConservationLaw<NC>,
{
    let out = case
        .simulate(&config.limiter, &config.time)
        .map_err(|failure| failure.source)?;
    case.error(&out.field, config.time.final_time)
}

/// Final-time error of one refinement level.
fn convergence_error(config: &RunConfig, degree: usize, k: usize) -> Result<f64> {
    let (kx, ky) = config.elements_for(k);
    let gamma = gamma_of(config);
    match config.problem {
        ProblemKind::Vortex => final_error(vortex_case(gamma, degree, kx, ky)?, config),
        ProblemKind::Sod => final_error(sod_case(gamma, degree, kx)?, config),
        other => Err(SolverError::config(
            "problem.name",
            format!("`{other}` has no exact solution for a convergence study"),
        )),
    }
}

/// Errors and rates over `degrees × refinements`; writes `table.csv`.
pub fn convergence(config: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    let rows = pool(config.workers)?.install(|| -> Result<_> {
        let mut runs = Vec::new();
        for &degree in &config.degrees {
            for &k in &config.refinements {
                let error = convergence_error(config, degree, k)?;
                info!("N = {degree}, K = {k}: error {error:e}");
                runs.push((degree, k, error));
            }
        }
        Ok(convergence_rates(&runs))
    })?;
    output::write_table(&config.output_dir.join("table.csv"), &rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_start_admissible() {
        assert!(sod_case(1.4, 2, 4).is_ok());
        assert!(kpp_case(2, 3, 3).is_ok());
        assert!(vortex_case(1.4, 2, 4, 2).is_ok());
        assert!(kelvin_helmholtz_case(1.4, 2, 3, 3).is_ok());
        assert!(astro_jet_case(5.0 / 3.0, 2, 3, 3).is_ok());
    }

    #[test]
    fn exact_vortex_at_start_has_zero_error() {
        let case = vortex_case(1.4, 2, 4, 2).unwrap();
        assert_eq!(case.error(&case.initial, 0.0).unwrap(), 0.0);
        assert!(case.phi_global > 0.0);
    }

    #[test]
    fn problems_without_exact_solution_refuse_errors() {
        let case = kpp_case(1, 2, 2).unwrap();
        assert!(case.error(&case.initial, 0.0).is_err());
    }
}
