//! Command-line front end: JSON run configuration, named presets, and the
//! `evolve`, `converge` and `exact-circle` commands with their CSV, JSON and
//! SVG outputs.

mod commands;
mod config;
pub mod output;
mod presets;

use std::path::Path;

pub use commands::{
    run_converge, run_evolve, run_exact_circle, ConvergeSummary, EvolveSummary, ExactCircleTable,
};
pub use config::RunConfig;
pub use presets::{find_preset, preset_names, presets, table1_config, Preset, DEFAULT_DT, DEFAULT_J};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER_ABORT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Solver(Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: impl Into<std::io::Error>) -> Self {
        CliError::Io { path: path.display().to_string(), source: source.into() }
    }

    pub(crate) fn from_invalid(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    /// Solver failures exit with 2; bad input and unusable output paths with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => EXIT_SOLVER_ABORT,
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
        }
    }
}
