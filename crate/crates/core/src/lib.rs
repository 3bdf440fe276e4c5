//! Linearized alternating direction method with parallel splitting and
//! adaptive penalty (LADMPSAP) for multi-block separable convex programs.

// `!(x > 0.0)` is how parameter checks reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod error;
pub mod linops;
pub mod oracle;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod solver;
pub mod spectral;

pub use block::Block;
pub use error::{Error, Result};
pub use linops::{lift_with_sets, op_norm, LinearMap, NormEstimate};
pub use problem::{BlockSpec, ConvexSet, Problem};
pub use prox::{ProxTerm, SmoothTerm, Term};
pub use solver::{solve, solve_naive_ladm, SolveReport, SolverConfig, Status, Variant};
