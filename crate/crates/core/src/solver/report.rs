use crate::block::Block;

use super::config::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// Both stopping conditions held at exit.
    Converged,
    MaxIter,
    /// The feasibility residual crossed the divergence guard or an iterate
    /// became non-finite.
    Diverged,
    /// A proximal map failed (for example a non-converging SVD).
    NumericError,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max-iter",
            Status::Diverged => "diverged",
            Status::NumericError => "numeric-error",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantities of iteration `k`, i.e. of the step `x^k → x^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub feasibility: f64,
    pub update_residual: f64,
    /// `β_k`, the penalty used during the step.
    pub beta: f64,
    /// Objective at `x^{k+1}`.
    pub objective: f64,
}

/// `(x^k, λ^k, β_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<Block>,
    pub lambda: Block,
    pub beta: f64,
}

/// Parameters actually used, after lifting and Auto resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedParameters {
    pub eta: Vec<f64>,
    pub t: Vec<f64>,
    /// Operator norms of the solved problem's maps.
    pub norms: Vec<f64>,
    /// Strict lower bounds the `η_i` were checked against.
    pub eta_bounds: Vec<f64>,
    pub beta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub variant: Variant,
    pub status: Status,
    /// Details for `Diverged` and `NumericError`.
    pub message: Option<String>,
    pub iterations: usize,
    /// Final blocks of the solved problem. For the set-constrained
    /// variants this is the lifted problem: originals, then auxiliary copies.
    pub x: Vec<Block>,
    /// Final value of each original block. Set-constrained blocks report
    /// their auxiliary copy, which is a projection onto the set.
    pub solution: Vec<Block>,
    pub lambda: Block,
    pub beta: f64,
    pub feasibility: f64,
    pub update_residual: f64,
    pub parameters: ResolvedParameters,
    pub trace: Vec<TraceEntry>,
    /// `k = 0, 1, …, iterations` when iterates are recorded.
    pub snapshots: Vec<Snapshot>,
    /// `x̄^K = Σ γ_k x^{k+1}` over the solved problem's blocks.
    pub ergodic: Option<Vec<Block>>,
    pub ergodic_weights: Vec<f64>,
    /// Fejér quantity at `k = 0, 1, …, iterations` when a reference was
    /// supplied.
    pub fejer: Vec<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}
