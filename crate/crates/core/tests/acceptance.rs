//! End-to-end acceptance criteria. Each test prints one `criterion k: pass|FAIL`
//! line with the measured quantities before asserting.

use std::sync::OnceLock;

use subcell_es::diagnostics::{conservation_drift, total_magnitudes};
use subcell_es::discretization::ElementField;
use subcell_es::harness::{astro_jet_case, sod_case, vortex_case};
use subcell_es::limiter::{ConstraintMode, LimiterConfig};
use subcell_es::problems::sod_exact;
use subcell_es::timeloop::{ssprk33_step, TimeConfig};
use subcell_es::verify::{compare_greedy, operator_defects};

fn report(criterion: usize, passed: bool, detail: impl std::fmt::Display) {
    let verdict = if passed { "pass" } else { "FAIL" };
    println!("criterion {criterion}: {verdict}: {detail}");
}

#[test]
fn criterion_01_greedy_matches_exact_oracle() {
    let c = compare_greedy(1000, 20240901);
    let passed = c.infeasible == 0 && c.vertex_gap <= 1e-10;
    report(
        1,
        passed,
        format!(
            "{} LPs, {} infeasible, max gap to vertex oracle {:.2e} (dual {:.2e})",
            c.instances, c.infeasible, c.vertex_gap, c.dual_gap
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_02_operator_identities() {
    let d = operator_defects(8).unwrap();
    let passed = d.max() <= 1e-12;
    report(
        2,
        passed,
        format!("SBP {:.2e}, quadrature {:.2e}, column {:.2e}", d.sbp, d.quadrature, d.column),
    );
    assert!(passed);
}

fn max_residual(records: &[subcell_es::diagnostics::DiagnosticsRecord]) -> f64 {
    records
        .iter()
        .map(|r| r.max_entropy_residual)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_03_cell_entropy_inequality_on_sod() {
    let case = sod_case(1.4, 3, 50).unwrap();
    let time = TimeConfig::new(0.2);
    let limited = case.simulate(&LimiterConfig::default(), &time).unwrap();
    let limited_worst = max_residual(&limited.records);
    let unlimited_records = match case.simulate(&LimiterConfig::unlimited(), &time) {
        Ok(out) => out.records,
        Err(failure) => failure.records,
    };
    let unlimited_worst = max_residual(&unlimited_records);
    let passed = limited_worst <= 1e-10 && unlimited_worst > 1e-8;
    report(
        3,
        passed,
        format!(
            "limited max residual {limited_worst:.2e} over {} steps; unlimited {unlimited_worst:.2e}",
            limited.steps
        ),
    );
    assert!(passed);
}

/// Largest density jump between neighbouring nodes inside `[lo, hi]`,
/// numerically and for the exact solution at the same node pairs.
fn rarefaction_jumps(field: &ElementField<3>, positions: &[f64], t: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut nodes: Vec<(f64, f64)> = positions
        .iter()
        .zip(&field.values)
        .map(|(x, u)| (*x, u[0]))
        .filter(|(x, _)| (lo..=hi).contains(x))
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let exact = |x: f64| sod_exact(1.4, x, t)[0];
    nodes.windows(2).fold((0.0, 0.0), |(num, ex), w| {
        (
            f64::max(num, (w[1].1 - w[0].1).abs()),
            f64::max(ex, (exact(w[1].0) - exact(w[0].0)).abs()),
        )
    })
}

#[test]
fn criterion_04_smooth_sonic_rarefaction() {
    let case = sod_case(1.4, 3, 100).unwrap();
    let t = 0.2;
    let time = TimeConfig::new(t);
    let npe = case.initial.nodes_per_element;
    let positions: Vec<f64> = (0..case.initial.values.len())
        .map(|k| case.disc.mesh.node_position(&case.disc.ops, k / npe, k % npe)[0])
        .collect();

    let limited = case.simulate(&LimiterConfig::default(), &time).unwrap();
    let (jump, exact_jump) = rarefaction_jumps(&limited.field, &positions, t, 0.25, 0.5);

    // plain DGSEM loses positivity on this problem, so the comparison run keeps
    // only the positivity constraints
    let dgsem = LimiterConfig {
        entropy: false,
        constraints: ConstraintMode::Positivity,
        ..LimiterConfig::default()
    };
    let reference = case.simulate(&dgsem, &time).unwrap();
    let (dgsem_jump, _) = rarefaction_jumps(&reference.field, &positions, t, 0.25, 0.5);

    let limit = 3.0 * exact_jump;
    let passed = jump < limit && dgsem_jump >= limit;
    report(
        4,
        passed,
        format!(
            "max adjacent density jump in [0.25, 0.5]: limited {jump:.4e}, DGSEM {dgsem_jump:.4e}, limit {limit:.4e}"
        ),
    );
    assert!(passed);
}

/// One vortex run of a refinement study.
#[derive(Debug, Clone)]
struct VortexRun {
    k: usize,
    error: f64,
    drift: f64,
    limited_fraction: f64,
}

fn vortex_runs(constraints: ConstraintMode, degree: usize, refinements: &[usize]) -> Vec<VortexRun> {
    let limiter = LimiterConfig {
        constraints,
        ..LimiterConfig::default()
    };
    let time = TimeConfig::new(1.0);
    refinements
        .iter()
        .map(|&k| {
            let case = vortex_case(1.4, degree, 2 * k, k).unwrap();
            let initial = case.initial.totals(&case.disc.mesh, &case.disc.ops);
            let scale = total_magnitudes(&case.disc, &case.initial);
            let out = case.simulate(&limiter, &time).unwrap();
            let limited = out.min_factors.iter().filter(|l| **l < 1.0).count();
            VortexRun {
                k,
                error: case.error(&out.field, 1.0).unwrap(),
                drift: conservation_drift(&initial, &scale, &out.records),
                limited_fraction: limited as f64 / out.min_factors.len() as f64,
            }
        })
        .collect()
}

fn rate(coarse: &VortexRun, fine: &VortexRun) -> f64 {
    (coarse.error / fine.error).ln() / (fine.k as f64 / coarse.k as f64).ln()
}

const DESK_REFINEMENTS: [usize; 3] = [5, 10, 20];

fn entropy_matrix() -> &'static [VortexRun] {
    static RUNS: OnceLock<Vec<VortexRun>> = OnceLock::new();
    RUNS.get_or_init(|| vortex_runs(ConstraintMode::None, 2, &DESK_REFINEMENTS))
}

fn min_entropy_matrix() -> &'static [VortexRun] {
    static RUNS: OnceLock<Vec<VortexRun>> = OnceLock::new();
    RUNS.get_or_init(|| vortex_runs(ConstraintMode::MinEntropy, 2, &DESK_REFINEMENTS))
}

fn relaxed_matrix() -> &'static [VortexRun] {
    static RUNS: OnceLock<Vec<VortexRun>> = OnceLock::new();
    RUNS.get_or_init(|| vortex_runs(ConstraintMode::MinEntropyRelaxed, 2, &DESK_REFINEMENTS))
}

fn describe(runs: &[VortexRun]) -> String {
    runs.iter()
        .map(|r| format!("K={} {:.4e}", r.k, r.error))
        .collect::<Vec<_>>()
        .join(", ")
}

#[test]
fn criterion_05_vortex_convergence_with_entropy_limiting() {
    let runs = entropy_matrix();
    let monotone = runs.windows(2).all(|w| w[1].error < w[0].error);
    let last = rate(&runs[1], &runs[2]);
    let passed = monotone && last >= 1.0;
    report(5, passed, format!("N=2: {}; rate 10->20 {last:.3}", describe(runs)));
    assert!(passed);
}

/// Full-scale part of criterion 5: N = 3 against the published K = 20 error
/// and rate.
#[test]
#[ignore = "optional full-scale check against the published error"]
fn criterion_05_full_scale_vortex_against_table() {
    let runs = vortex_runs(ConstraintMode::None, 3, &[10, 20]);
    let observed = rate(&runs[0], &runs[1]);
    let error = runs[1].error;
    let passed = (error - 8.898e-3).abs() <= 0.2 * 8.898e-3 && (observed - 2.99).abs() <= 0.3;
    report(5, passed, format!("full scale N=3: {}; rate {observed:.3}", describe(&runs)));
    assert!(passed);
}

#[test]
fn criterion_06_minimum_entropy_order_reduction() {
    let strict = min_entropy_matrix();
    let relaxed = relaxed_matrix();
    let full = entropy_matrix();
    let strict_rate = rate(&strict[1], &strict[2]);
    let relaxed_rate = rate(&relaxed[1], &relaxed[2]);
    let full_rate = rate(&full[1], &full[2]);
    let passed = strict_rate <= 1.3 && strict_rate < relaxed_rate && relaxed_rate < full_rate;
    report(
        6,
        passed,
        format!(
            "N=2 rates 10->20: min entropy {strict_rate:.3}, relaxed {relaxed_rate:.3}, entropy only {full_rate:.3}"
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_07_conservation_on_periodic_vortex() {
    let worst = [entropy_matrix(), min_entropy_matrix(), relaxed_matrix()]
        .iter()
        .flat_map(|runs| runs.iter().map(|r| r.drift))
        .fold(0.0, f64::max);
    let passed = worst <= 1e-11;
    report(7, passed, format!("max relative drift over 9 runs {worst:.2e}"));
    assert!(passed);
}

#[test]
fn criterion_08_astrophysical_jet_stays_positive() {
    let case = astro_jet_case(5.0 / 3.0, 3, 50, 50).unwrap();
    let limiter = LimiterConfig {
        constraints: ConstraintMode::Positivity,
        ..LimiterConfig::default()
    };
    let result = case.simulate(&limiter, &TimeConfig::new(0.001));
    let (passed, detail) = match result {
        Ok(out) => {
            let min_rho = out.records.iter().map(|r| r.extrema[0]).fold(f64::INFINITY, f64::min);
            let min_p = out.records.iter().map(|r| r.extrema[1]).fold(f64::INFINITY, f64::min);
            (
                min_rho > 0.0 && min_p > 0.0,
                format!("{} steps, min density {min_rho:.3e}, min pressure {min_p:.3e}", out.steps),
            )
        }
        Err(failure) => (false, failure.to_string()),
    };
    report(8, passed, detail);
    assert!(passed);
}

#[test]
fn criterion_09_ssprk33_stability_polynomial() {
    let mut worst: f64 = 0.0;
    for lambda in [-0.3, -1.0, -2.5] {
        for dt in [0.01, 0.1, 0.5, 1.0] {
            let mut u = ElementField {
                nodes_per_element: 1,
                values: vec![[1.0]],
            };
            let z: f64 = lambda * dt;
            let amplification = 1.0 + z + z * z / 2.0 + z * z * z / 6.0;
            for _ in 0..5 {
                let before = u.values[0][0];
                u = ssprk33_step(&u, dt, |s, _| Ok(vec![[lambda * s.values[0][0]]])).unwrap();
                worst = worst.max((u.values[0][0] - amplification * before).abs());
            }
        }
    }
    let passed = worst <= 1e-14;
    report(9, passed, format!("max per-step deviation {worst:.2e}"));
    assert!(passed);
}

#[test]
fn criterion_10_limiter_inactive_in_smooth_flow() {
    let run = &entropy_matrix()[2];
    let passed = run.limited_fraction <= 0.05;
    report(
        10,
        passed,
        format!(
            "vortex N=2, K={}: {:.1}% of elements have some factor below 1 at the final time",
            run.k,
            100.0 * run.limited_fraction
        ),
    );
    assert!(passed);
}
