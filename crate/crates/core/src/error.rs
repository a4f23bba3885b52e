//! Error types shared across the solver.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("inadmissible state at element {element}, node {node}{}: {state:?}", stage_suffix(*.stage))]
    Admissibility {
        element: usize,
        node: usize,
        stage: Option<usize>,
        state: Vec<f64>,
    },

    #[error("inadmissible state {state:?}")]
    InadmissibleState { state: Vec<f64> },

    #[error("subcell flux recovery mismatch at element {element}, axis {axis}, line {line}: {mismatch:e}")]
    Consistency {
        element: usize,
        axis: usize,
        line: usize,
        mismatch: f64,
    },

    #[error("entropy linear program infeasible at element {element}, axis {axis}: b = {bound:e}")]
    Infeasible {
        element: usize,
        axis: usize,
        bound: f64,
    },

    #[error("non-finite value in {what} at element {element}")]
    NonFinite { what: &'static str, element: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("run aborted at t = {time:e} after {steps} steps, last valid state in {}: {source}", dump.display())]
    Aborted {
        time: f64,
        steps: usize,
        dump: PathBuf,
        #[source]
        source: Box<SolverError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn stage_suffix(stage: Option<usize>) -> String {
    match stage {
        Some(s) => format!(" (stage {s})"),
        None => String::new(),
    }
}

impl SolverError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SolverError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SolverError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a stage number to an admissibility error.
    pub fn at_stage(self, stage: usize) -> Self {
        match self {
            SolverError::Admissibility {
                element,
                node,
                state,
                ..
            } => SolverError::Admissibility {
                element,
                node,
                stage: Some(stage),
                state,
            },
            other => other,
        }
    }
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;
