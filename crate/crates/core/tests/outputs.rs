use std::fs;
use std::path::{Path, PathBuf};

use subcell_es::config::RunConfig;
use subcell_es::harness::{run, sod_case};

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn shipped_configs_are_valid() {
    for name in ["sod.ini", "kpp.ini", "vortex.ini", "kelvin_helmholtz.ini", "astro_jet.ini"] {
        let config = RunConfig::load(&shipped(name), &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(format!("{}.ini", config.problem), name);
    }
}

fn small_sod(dir: &Path) -> RunConfig {
    let overrides = [
        ("mesh.k", "20"),
        ("time.final", "0.05"),
        ("output.snapshot_times", "0.02, 0.04"),
    ]
    .map(|(k, v)| (k.to_string(), v.to_string()));
    let mut config = RunConfig::load(&shipped("sod.ini"), &overrides).unwrap();
    config.output_dir = dir.to_path_buf();
    config.workers = 1;
    config
}

#[test]
fn written_mass_matches_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sod(dir.path());
    let summary = run(&config).unwrap();
    assert!(summary.error.is_some());

    let case = sod_case(1.4, config.degree, config.kx).unwrap();
    let npe = case.initial.nodes_per_element;
    let fields = fs::read_to_string(&summary.written.fields).unwrap();
    let mut lines = fields.lines();
    assert_eq!(lines.next().unwrap(), "element,x,y,rho,rhou,E,p,phi");
    let mass: f64 = lines
        .enumerate()
        .map(|(row, line)| {
            let rho: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
            case.disc.mesh.node_mass(&case.disc.ops, row % npe) * rho
        })
        .sum();

    let diagnostics = fs::read_to_string(&summary.written.diagnostics).unwrap();
    assert!(diagnostics.starts_with("t,dt,mass,"));
    let last = diagnostics.lines().last().unwrap();
    let recorded: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((mass - recorded).abs() <= 1e-13 * recorded.abs(), "{mass} vs {recorded}");
}

#[test]
fn snapshots_and_line_endings() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run(&small_sod(dir.path())).unwrap();
    let names: Vec<_> = summary
        .written
        .snapshots
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["fields_000.csv", "fields_001.csv"]);
    for path in summary.written.snapshots.iter().chain([&summary.written.limiting]) {
        let text = fs::read_to_string(path).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
    }
    let limiting = fs::read_to_string(&summary.written.limiting).unwrap();
    assert_eq!(limiting.lines().count(), 1 + 2 * 20);
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(&small_sod(a.path())).unwrap();
    let second = run(&small_sod(b.path())).unwrap();
    for (x, y) in [
        (&first.written.fields, &second.written.fields),
        (&first.written.diagnostics, &second.written.diagnostics),
        (&first.written.limiting, &second.written.limiting),
    ] {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn kpp_fields_carry_the_plot_range() {
    let dir = tempfile::tempdir().unwrap();
    let overrides = [("mesh.k", "4"), ("mesh.degree", "2"), ("time.final", "0.01")]
        .map(|(k, v)| (k.to_string(), v.to_string()));
    let mut config = RunConfig::load(&shipped("kpp.ini"), &overrides).unwrap();
    config.output_dir = dir.path().to_path_buf();
    let summary = run(&config).unwrap();
    let text = fs::read_to_string(&summary.written.fields).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# plot_range=-0.5,12");
    assert_eq!(lines.next().unwrap(), "element,x,y,u");
}

#[test]
fn aborted_runs_leave_a_failure_dump() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_sod(dir.path());
    config.limiter = subcell_es::limiter::LimiterConfig::unlimited();
    config.kx = 100;
    config.time.snapshot_times.clear();
    let err = run(&config).unwrap_err();
    assert!(matches!(err, subcell_es::SolverError::Aborted { .. }), "{err}");
    assert!(dir.path().join("fields_failure.csv").exists());
    assert!(err.to_string().contains("fields_failure.csv"));
}
