//! Config-driven experiment runner for the ladmpsap solvers.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, Format};
pub use experiment::{run_experiment, ExperimentOutcome};
pub use report::{emit_report, parse_csv, Report, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Solver(#[from] ladmpsap::Error),
}
