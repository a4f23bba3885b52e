//! Entropy stable subcell limiting for discontinuous Galerkin spectral
//! element methods on uniform Cartesian meshes.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod discretization;
pub mod limiter;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod models;
pub mod operators;
pub mod output;
pub mod problems;
pub mod timeloop;
pub mod verify;

pub use error::{Result, SolverError};
