//! Command-line entry point: `run`, `convergence` and `check`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{parse_override, RunConfig};
use crate::error::Result;
use crate::harness;
use crate::verify::run_checks;

#[derive(Debug, Parser)]
#[command(name = "subcell", version, about = "Entropy stable subcell limiting for DGSEM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its CSV outputs.
    Run {
        config: PathBuf,
        /// Overrides of the form `--section.key=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Run every (degree, K) pair of the configuration and write `table.csv`.
    Convergence {
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Run the property suites.
    Check,
}

fn load(config: &Path, overrides: &[String]) -> Result<RunConfig> {
    let pairs = overrides
        .iter()
        .map(|o| parse_override(o))
        .collect::<Result<Vec<_>>>()?;
    RunConfig::load(config, &pairs)
}

fn execute(command: Command) -> std::result::Result<(), String> {
    match command {
        Command::Run { config, overrides } => {
            let config = load(&config, &overrides).map_err(|e| e.to_string())?;
            let summary = harness::run(&config).map_err(|e| e.to_string())?;
            println!(
                "{}: {} steps to t = {}, outputs in {}",
                config.problem,
                summary.steps,
                summary.final_time,
                config.output_dir.display()
            );
            if let Some(error) = summary.error {
                println!("relative L2 error {error:.6e}");
            }
            Ok(())
        }
        Command::Convergence { config, overrides } => {
            let config = load(&config, &overrides).map_err(|e| e.to_string())?;
            let rows = harness::convergence(&config).map_err(|e| e.to_string())?;
            println!("{:>6} {:>6} {:>14} {:>8}", "N", "K", "error", "rate");
            for r in rows {
                let rate = r.rate.map(|x| format!("{x:.3}")).unwrap_or_default();
                println!("{:>6} {:>6} {:>14.6e} {:>8}", r.degree, r.elements, r.error, rate);
            }
            Ok(())
        }
        Command::Check => {
            let outcomes = run_checks();
            for o in &outcomes {
                println!("[{}] {}: {}", if o.passed { "pass" } else { "FAIL" }, o.name, o.detail);
            }
            match outcomes.iter().filter(|o| !o.passed).count() {
                0 => Ok(()),
                n => Err(format!("{n} property suite(s) failed")),
            }
        }
    }
}

/// Parse `args` (including the program name) and execute; returns the
/// process exit code. Failures are reported on one line of stderr.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}
