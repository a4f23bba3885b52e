//! INI run configuration with command-line overrides.
//!
//! Sections and keys (defaults in brackets):
//!
//! - `problem`: `name` (required), `gamma` [problem default]
//! - `mesh`: `degree` [3], `k` [10], `kx`, `ky` [problem aspect times `k`],
//!   `degrees` and `refinements` (comma lists, convergence runs only)
//! - `limiter`: `entropy` [on], `beta` [0], `constraints` [none],
//!   `relax` [0.5], `blending` [off], `low_order` [off]
//! - `time`: `final` [problem default], `cfl_safety` [1.0], `workers`
//!   [0 = all cores]
//! - `output`: `directory` [output], `snapshot_times` [none]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::error::{Result, SolverError};
use crate::limiter::{ConstraintMode, LimiterConfig};
use crate::problems::{ProblemKind, ProblemSetup};
use crate::timeloop::TimeConfig;

const KNOWN_KEYS: &[&str] = &[
    "problem.name",
    "problem.gamma",
    "mesh.degree",
    "mesh.k",
    "mesh.kx",
    "mesh.ky",
    "mesh.degrees",
    "mesh.refinements",
    "limiter.entropy",
    "limiter.beta",
    "limiter.constraints",
    "limiter.relax",
    "limiter.blending",
    "limiter.low_order",
    "time.final",
    "time.cfl_safety",
    "time.workers",
    "output.directory",
    "output.snapshot_times",
];

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub gamma: Option<f64>,
    pub degree: usize,
    pub kx: usize,
    pub ky: usize,
    /// Degrees of a convergence study (defaults to `[degree]`).
    pub degrees: Vec<usize>,
    /// Values of `K` of a convergence study (defaults to `[k]`).
    pub refinements: Vec<usize>,
    pub limiter: LimiterConfig,
    pub time: TimeConfig,
    pub output_dir: PathBuf,
    /// Worker threads, 0 for one per core.
    pub workers: usize,
}

impl RunConfig {
    pub fn setup(&self) -> ProblemSetup {
        self.problem.setup()
    }

    /// Element counts for refinement level `k` of this problem.
    pub fn elements_for(&self, k: usize) -> (usize, usize) {
        let aspect = self.setup().aspect;
        if self.setup().dim == 1 {
            (aspect[0] * k, 1)
        } else {
            (aspect[0] * k, aspect[1] * k)
        }
    }

    /// Read `path` and apply `overrides` (`section.key`, value) on top.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SolverError::io(path, e))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let ini = Ini::load_from_str(text)
            .map_err(|e| SolverError::config("<file>", e.to_string()))?;
        let mut values = BTreeMap::new();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let full = match section {
                    Some(s) => format!("{s}.{key}"),
                    None => key.to_string(),
                };
                values.insert(full, value.trim().to_string());
            }
        }
        for (key, value) in overrides {
            values.insert(key.clone(), value.trim().to_string());
        }
        if let Some(unknown) = values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(SolverError::config(unknown.clone(), "unknown key"));
        }
        Values(values).build()
    }
}

/// Parse `--section.key=value` into a key/value pair.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let body = arg.strip_prefix("--").unwrap_or(arg);
    match body.split_once('=') {
        Some((key, value)) if key.contains('.') => Ok((key.to_string(), value.to_string())),
        _ => Err(SolverError::config(
            arg,
            "overrides take the form --section.key=value",
        )),
    }
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    SolverError::config(key, format!("cannot parse `{v}` as {}", std::any::type_name::<T>()))
                })
            })
            .transpose()
    }

    fn switch(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("on" | "true" | "yes" | "1") => Ok(true),
            Some("off" | "false" | "no" | "0") => Ok(false),
            Some(v) => Err(SolverError::config(key, format!("expected on/off, got `{v}`"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| SolverError::config(key, format!("cannot parse list entry `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn build(self) -> Result<RunConfig> {
        let problem: ProblemKind = self
            .raw("problem.name")
            .ok_or_else(|| SolverError::config("problem.name", "missing"))?
            .parse()?;
        let setup = problem.setup();

        let gamma = match (self.parsed::<f64>("problem.gamma")?, setup.gamma) {
            (Some(_), None) => {
                return Err(SolverError::config("problem.gamma", "scalar problems have no gas"))
            }
            (Some(g), Some(_)) if !(g > 1.0 && g.is_finite()) => {
                return Err(SolverError::config("problem.gamma", "must exceed 1"))
            }
            (Some(g), Some(_)) => Some(g),
            (None, default) => default,
        };

        let degree = self.parsed::<usize>("mesh.degree")?.unwrap_or(3);
        let k = self.parsed::<usize>("mesh.k")?.unwrap_or(10);
        let kx = self.parsed::<usize>("mesh.kx")?.unwrap_or(setup.aspect[0] * k);
        let ky = if setup.dim == 1 {
            if self.raw("mesh.ky").is_some() {
                return Err(SolverError::config("mesh.ky", "1D problems have a single row"));
            }
            1
        } else {
            self.parsed::<usize>("mesh.ky")?.unwrap_or(setup.aspect[1] * k)
        };
        let degrees = self.list::<usize>("mesh.degrees")?.unwrap_or_else(|| vec![degree]);
        let refinements = self.list::<usize>("mesh.refinements")?.unwrap_or_else(|| vec![k]);
        for (key, bad) in [
            ("mesh.degree", degree == 0 || degree > 16),
            ("mesh.degrees", degrees.is_empty() || degrees.iter().any(|n| *n == 0 || *n > 16)),
            ("mesh.kx", kx == 0),
            ("mesh.ky", ky == 0),
            ("mesh.refinements", refinements.is_empty() || refinements.contains(&0)),
        ] {
            if bad {
                return Err(SolverError::config(key, "out of range"));
            }
        }

        let defaults = LimiterConfig::default();
        let limiter = LimiterConfig {
            entropy: self.switch("limiter.entropy", defaults.entropy)?,
            beta: self.parsed("limiter.beta")?.unwrap_or(defaults.beta),
            constraints: self
                .parsed::<String>("limiter.constraints")?
                .map(|s| s.parse::<ConstraintMode>())
                .transpose()?
                .unwrap_or(defaults.constraints),
            relax: self.parsed("limiter.relax")?.unwrap_or(defaults.relax),
            blending: self.switch("limiter.blending", defaults.blending)?,
            low_order_only: self.switch("limiter.low_order", defaults.low_order_only)?,
            greedy_tolerance: defaults.greedy_tolerance,
        };
        limiter.validate()?;
        if limiter.constraints != ConstraintMode::None && setup.gamma.is_none() {
            return Err(SolverError::config(
                "limiter.constraints",
                "convex constraints need an ideal gas model",
            ));
        }

        let time = TimeConfig {
            final_time: self.parsed("time.final")?.unwrap_or(setup.final_time),
            cfl_safety: self.parsed("time.cfl_safety")?.unwrap_or(1.0),
            snapshot_times: self.list("output.snapshot_times")?.unwrap_or_default(),
        };
        time.validate()?;

        Ok(RunConfig {
            problem,
            gamma,
            degree,
            kx,
            ky,
            degrees,
            refinements,
            limiter,
            time,
            output_dir: PathBuf::from(self.raw("output.directory").unwrap_or("output")),
            workers: self.parsed("time.workers")?.unwrap_or(0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: SolverError) -> String {
        match err {
            SolverError::Config { key, .. } => key,
            other => panic!("expected a configuration error, got {other}"),
        }
    }

    #[test]
    fn empty_limiter_section_gives_defaults() {
        let c = RunConfig::parse("[problem]\nname = vortex\n[limiter]\n", &[]).unwrap();
        assert!(c.limiter.entropy);
        assert_eq!(c.limiter.beta, 0.0);
        assert_eq!(c.limiter.constraints, ConstraintMode::None);
        assert_eq!((c.kx, c.ky), (20, 10));
        assert_eq!(c.time.final_time, 1.0);
        assert_eq!(c.gamma, Some(1.4));
    }

    #[test]
    fn beta_out_of_range_names_key() {
        let err = RunConfig::parse("[problem]\nname = sod\n[limiter]\nbeta = 1.5\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "limiter.beta");
    }

    #[test]
    fn override_wins_over_file() {
        let text = "[problem]\nname = astro_jet\n[limiter]\nconstraints = positivity\n";
        let c = RunConfig::parse(text, &[parse_override("--limiter.constraints=tvd").unwrap()]).unwrap();
        assert_eq!(c.limiter.constraints, ConstraintMode::Tvd);
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let err = RunConfig::parse("[problem]\nname = sod\n[mesh]\nelements = 4\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "mesh.elements");
        let err = RunConfig::parse("[problem]\nname = sod\n[time]\nfinal = soon\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "time.final");
        let err = RunConfig::parse("[problem]\nname = sod\n[limiter]\nblending = maybe\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "limiter.blending");
        assert!(parse_override("--limiter").is_err());
    }

    #[test]
    fn unknown_problem_is_reported() {
        let err = RunConfig::parse("[problem]\nname = blast\n", &[]).unwrap_err();
        assert!(matches!(err, SolverError::UnknownProblem(ref p) if p == "blast"));
    }

    #[test]
    fn lists_and_one_dimensional_meshes() {
        let text = "[problem]\nname = sod\n[mesh]\nk = 50\ndegrees = 2, 3\nrefinements = 5,10,20\n[output]\nsnapshot_times = 0.1, 0.2\n";
        let c = RunConfig::parse(text, &[]).unwrap();
        assert_eq!((c.kx, c.ky), (50, 1));
        assert_eq!(c.degrees, vec![2, 3]);
        assert_eq!(c.refinements, vec![5, 10, 20]);
        assert_eq!(c.time.snapshot_times, vec![0.1, 0.2]);
        assert_eq!(c.elements_for(20), (20, 1));
        let err = RunConfig::parse("[problem]\nname = sod\n[output]\nsnapshot_times = 0.3\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "output.snapshot_times");
    }

    #[test]
    fn scalar_problem_rejects_gas_settings() {
        let err = RunConfig::parse("[problem]\nname = kpp\ngamma = 1.4\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "problem.gamma");
        let err = RunConfig::parse("[problem]\nname = kpp\n[limiter]\nconstraints = tvd\n", &[]).unwrap_err();
        assert_eq!(key_of(err), "limiter.constraints");
    }
}
