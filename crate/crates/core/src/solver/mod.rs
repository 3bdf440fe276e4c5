//! The solver engines and their diagnostics.

mod config;
mod diagnostics;
mod engine;
mod report;
mod steps;

pub use config::{BetaMax, EtaChoice, PenaltySchedule, SolverConfig, Variant};
pub use diagnostics::{
    ergodic_average, ergodic_weights, fejer_diagnostic, measure_alpha, optimality_measure,
};
pub use engine::{eta_bounds, solve, solve_naive_ladm};
pub use report::{ResolvedParameters, Snapshot, SolveReport, Status, TraceEntry};
pub use steps::{
    check_stopping, compute_lambda_hat, update_beta, update_blocks_parallel, update_lambda,
    ResidualRule, Residuals, SolverState, StepSizes, StoppingCheck,
};
