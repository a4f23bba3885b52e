//! CSV output: nodal fields, per-step diagnostics, limiter activity and
//! convergence tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{extrema_names, ConvergenceRow, DiagnosticsRecord};
use crate::discretization::{Discretization, ElementField};
use crate::error::{Result, SolverError};
use crate::models::ConservationLaw;
use crate::timeloop::Snapshot;

/// Full-precision representation of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| SolverError::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| SolverError::io(path, e))
}

/// Column name of the domain total of a conservative component.
pub fn total_name(component: &str) -> &str {
    match component {
        "rho" => "mass",
        "rhou" => "momentum_x",
        "rhov" => "momentum_y",
        "E" => "energy",
        other => other,
    }
}

/// `fields_NNN.csv` for snapshot `index`.
pub fn snapshot_file_name(index: usize) -> String {
    format!("fields_{index:03}.csv")
}

/// One row per node: element, position, conservative components and, for
/// Euler, pressure and `φ`. Scalar problems with a reference plot range
/// carry it in a leading comment line.
pub fn fields_csv<M, const NC: usize>(
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    plot_range: Option<(f64, f64)>,
) -> String
where
    M: ConservationLaw<NC>,
{
    let gas = disc.model.gas();
    let mut out = String::new();
    if let (None, Some((lo, hi))) = (gas, plot_range) {
        let _ = writeln!(out, "# plot_range={lo},{hi}");
    }
    out.push_str("element,x,y");
    for name in disc.model.component_names() {
        out.push(',');
        out.push_str(name);
    }
    if gas.is_some() {
        out.push_str(",p,phi");
    }
    out.push('\n');
    let npe = field.nodes_per_element;
    for (k, u) in field.values.iter().enumerate() {
        let (e, n) = (k / npe, k % npe);
        let x = disc.mesh.node_position(&disc.ops, e, n);
        let _ = write!(out, "{e},{},{}", fmt_f64(x[0]), fmt_f64(x[1]));
        for v in u {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        if let Some(g) = gas {
            let _ = write!(out, ",{},{}", fmt_f64(g.pressure(u)), fmt_f64(g.phi(u)));
        }
        out.push('\n');
    }
    out
}

pub fn write_fields<M, const NC: usize>(
    path: &Path,
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    plot_range: Option<(f64, f64)>,
) -> Result<()>
where
    M: ConservationLaw<NC>,
{
    write(path, &fields_csv(disc, field, plot_range))
}

/// Header of `diagnostics.csv`.
pub fn diagnostics_header<M, const NC: usize>(model: &M) -> String
where
    M: ConservationLaw<NC>,
{
    let mut cols = vec!["t", "dt"];
    cols.extend(model.component_names().iter().map(|c| total_name(c)));
    cols.extend(["entropy", "max_entropy_residual"]);
    cols.extend(extrema_names(model));
    cols.push("limited_elements");
    cols.join(",")
}

pub fn diagnostics_csv<M, const NC: usize>(model: &M, records: &[DiagnosticsRecord]) -> String
where
    M: ConservationLaw<NC>,
{
    let mut out = diagnostics_header(model);
    out.push('\n');
    for r in records {
        let mut cols = vec![fmt_f64(r.t), fmt_f64(r.dt)];
        cols.extend(r.totals.iter().map(|v| fmt_f64(*v)));
        cols.push(fmt_f64(r.entropy));
        cols.push(fmt_f64(r.max_entropy_residual));
        cols.extend(r.extrema.iter().map(|v| fmt_f64(*v)));
        cols.push(r.limited_elements.to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Per-snapshot, per-element smallest limiting factor.
pub fn limiting_csv<const NC: usize>(snapshots: &[Snapshot<NC>]) -> String {
    let mut out = String::from("snapshot,t,element,min_factor\n");
    for (s, snap) in snapshots.iter().enumerate() {
        for (e, l) in snap.min_factors.iter().enumerate() {
            let _ = writeln!(out, "{s},{},{e},{}", fmt_f64(snap.time), fmt_f64(*l));
        }
    }
    out
}

pub fn table_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("degree,k,error,rate\n");
    for r in rows {
        let rate = r.rate.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{rate}", r.degree, r.elements, fmt_f64(r.error));
    }
    out
}

/// Files produced by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenRun {
    pub fields: PathBuf,
    pub diagnostics: PathBuf,
    pub limiting: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

/// Write `fields.csv`, `diagnostics.csv`, `limiting.csv` and one
/// `fields_NNN.csv` per snapshot into `dir`.
pub fn write_run<M, const NC: usize>(
    dir: &Path,
    disc: &Discretization<M, NC>,
    field: &ElementField<NC>,
    records: &[DiagnosticsRecord],
    snapshots: &[Snapshot<NC>],
    plot_range: Option<(f64, f64)>,
) -> Result<WrittenRun>
where
    M: ConservationLaw<NC>,
{
    let written = WrittenRun {
        fields: dir.join("fields.csv"),
        diagnostics: dir.join("diagnostics.csv"),
        limiting: dir.join("limiting.csv"),
        snapshots: (0..snapshots.len()).map(|i| dir.join(snapshot_file_name(i))).collect(),
    };
    write_fields(&written.fields, disc, field, plot_range)?;
    write(&written.diagnostics, &diagnostics_csv(&disc.model, records))?;
    write(&written.limiting, &limiting_csv(snapshots))?;
    for (path, snap) in written.snapshots.iter().zip(snapshots) {
        write_fields(path, disc, &snap.field, plot_range)?;
    }
    Ok(written)
}

pub fn write_table(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    write(path, &table_csv(rows))
}
