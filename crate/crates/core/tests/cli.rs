use std::path::Path;
use std::process::Command;

fn subcell() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subcell"))
}

#[test]
fn check_passes() {
    let out = subcell().arg("check").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[pass]")).count(), 4);
}

#[test]
fn missing_config_is_named() {
    let out = subcell().args(["run", "no/such/missing.ini"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.contains("missing.ini"));
}

#[test]
fn bad_override_names_the_key() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sod.ini");
    let out = subcell()
        .arg("run")
        .arg(&config)
        .arg("--limiter.beta=1.5")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("limiter.beta"));
}

#[test]
fn convergence_table_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/vortex.ini");
    let out = subcell()
        .arg("convergence")
        .arg(&config)
        .arg(format!("--output.directory={}", dir.path().display()))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let errors: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errors.len(), 3);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{table}");
}
