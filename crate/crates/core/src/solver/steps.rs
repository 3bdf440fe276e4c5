//! The individual steps of one iteration, exposed for testing and for
//! callers that want to drive the loop themselves.

use nalgebra::DMatrix;

use crate::block::Block;
use crate::error::{check_shape, Error, Result};
use crate::problem::{BlockSpec, Problem};

use super::config::{BetaMax, PenaltySchedule};

/// Iterates `(x^k, λ^k, β_k)` after `iter` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Vec<Block>,
    pub lambda: Block,
    pub beta: f64,
    pub iter: usize,
}

impl SolverState {
    /// `x⁰` from the problem and `λ⁰ = 0`.
    pub fn initial(problem: &Problem, beta0: f64) -> Self {
        let (r, c) = problem.rhs().shape();
        SolverState {
            x: problem.initial_point(),
            lambda: Block::zeros(r, c),
            beta: beta0,
            iter: 0,
        }
    }

    fn check(&self, problem: &Problem) -> Result<()> {
        check_shape("multiplier", problem.rhs().shape(), self.lambda.shape())?;
        problem.residual(&self.x).map(|_| ())
    }
}

/// Per-block constants: `σ_i = T_i + β η_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizes {
    pub eta: Vec<f64>,
    pub t: Vec<f64>,
    /// Linearize smooth parts (`x − (A†λ̂ + ∇g(x))/τ`, then prox of `h`)
    /// instead of taking the proximal map of the whole term.
    pub linearize: bool,
}

impl StepSizes {
    /// Plain parallel splitting with the given `η`.
    pub fn exact(eta: Vec<f64>) -> Self {
        let t = vec![0.0; eta.len()];
        StepSizes {
            eta,
            t,
            linearize: false,
        }
    }

    #[inline]
    pub fn tau(&self, i: usize, beta: f64) -> f64 {
        self.t[i] + beta * self.eta[i]
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.eta.len() != n || self.t.len() != n {
            return Err(Error::Dimension {
                context: "step sizes",
                expected: (n, n),
                found: (self.eta.len(), self.t.len()),
            });
        }
        Ok(())
    }
}

/// `λ̂ = λ + β(Σ A_i(x_i) − b)`.
pub fn compute_lambda_hat(state: &SolverState, problem: &Problem) -> Result<Block> {
    state.check(problem)?;
    let residual = problem.combined_raw(&state.x) - problem.rhs().as_matrix();
    Ok(Block::wrap(lambda_step(
        &state.lambda,
        &residual,
        state.beta,
    )))
}

#[inline]
pub(crate) fn lambda_step(lambda: &Block, residual: &DMatrix<f64>, beta: f64) -> DMatrix<f64> {
    lambda.as_matrix() + residual * beta
}

/// New block `i` from its current value, `A_i†(λ̂)` and `τ`. `grad` is the
/// gradient of the smooth part at `x_i`, present only when linearizing.
pub(crate) fn block_update(
    spec: &BlockSpec,
    xi: &Block,
    adj: &DMatrix<f64>,
    tau: f64,
    grad: Option<&Block>,
) -> Result<Block> {
    match grad {
        Some(g) => {
            let w = Block::wrap(xi.as_matrix() - (adj + g.as_matrix()) / tau);
            spec.term.prox_part().prox(&w, tau)
        }
        None => {
            let w = Block::wrap(xi.as_matrix() - adj / tau);
            spec.term.prox(&w, tau)
        }
    }
}

/// Every `x_i^{k+1}` from the same `λ̂`. Blocks are independent, so the
/// order in which they are computed does not matter.
pub fn update_blocks_parallel(
    state: &SolverState,
    problem: &Problem,
    lambda_hat: &Block,
    steps: &StepSizes,
) -> Result<Vec<Block>> {
    state.check(problem)?;
    steps.check(problem.len())?;
    check_shape(
        "auxiliary multiplier",
        problem.rhs().shape(),
        lambda_hat.shape(),
    )?;
    problem
        .blocks()
        .iter()
        .zip(&state.x)
        .enumerate()
        .map(|(i, (spec, xi))| {
            let adj = spec.map.adjoint_raw(lambda_hat.as_matrix());
            let grad = match (steps.linearize, spec.term.smooth_part()) {
                (true, Some(g)) => Some(g.gradient(xi)?),
                _ => None,
            };
            block_update(spec, xi, &adj, steps.tau(i, state.beta), grad.as_ref())
        })
        .collect()
}

/// `λ^{k+1} = λ^k + β_k(Σ A_i(x_i^{k+1}) − b)`.
pub fn update_lambda(state: &SolverState, problem: &Problem, new_x: &[Block]) -> Result<Block> {
    check_shape("multiplier", problem.rhs().shape(), state.lambda.shape())?;
    let residual = problem.residual(new_x)?;
    Ok(Block::wrap(lambda_step(
        &state.lambda,
        residual.as_matrix(),
        state.beta,
    )))
}

/// `min(β_max, ρβ)` with `ρ = ρ₀` when the relative step is below `ε₂`
/// (strictly) and `ρ = 1` otherwise.
pub fn update_beta(beta: f64, schedule: &PenaltySchedule, max_relative_step: f64) -> f64 {
    let rho = if max_relative_step < schedule.eps2 {
        schedule.rho0
    } else {
        1.0
    };
    match schedule.beta_max {
        BetaMax::Bounded(cap) => cap.min(rho * beta),
        BetaMax::Unbounded => rho * beta,
    }
}

/// How the second stopping residual is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum ResidualRule {
    /// `β_k · max_i √η_i ‖x_i^{k+1} − x_i^k‖ / ‖b‖`.
    Step,
    /// `max_i ‖A_i‖⁻¹ ‖∇g_i(x^{k+1}) − ∇g_i(x^k) − τ_i(x^{k+1} − x^k)‖ / ‖b‖`
    /// with the given operator norms. Blocks with a zero map are skipped.
    Kkt { norms: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub feasibility: f64,
    pub update: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingCheck {
    pub feasibility_ok: bool,
    pub update_ok: bool,
    pub residuals: Residuals,
}

impl StoppingCheck {
    pub fn converged(&self) -> bool {
        self.feasibility_ok && self.update_ok
    }
}

pub(crate) fn step_residual(
    eta: &[f64],
    beta: f64,
    old: &[Block],
    new: &[Block],
    scale: f64,
) -> f64 {
    let largest = old
        .iter()
        .zip(new)
        .zip(eta)
        .map(|((a, b), e)| e.sqrt() * a.distance(b))
        .fold(0.0_f64, f64::max);
    beta * largest / scale
}

pub(crate) fn kkt_residual(
    steps: &StepSizes,
    norms: &[f64],
    beta: f64,
    old: &[Block],
    new: &[Block],
    grads: &[(Option<Block>, Option<Block>)],
    scale: f64,
) -> f64 {
    let mut largest = 0.0_f64;
    for i in 0..old.len() {
        if norms[i] == 0.0 {
            continue;
        }
        let tau = steps.tau(i, beta);
        let mut v = (new[i].as_matrix() - old[i].as_matrix()) * (-tau);
        if let (Some(g_old), Some(g_new)) = &grads[i] {
            v += g_new.as_matrix() - g_old.as_matrix();
        }
        largest = largest.max(v.norm() / norms[i]);
    }
    largest / scale
}

/// Both stopping residuals for the step `state.x → new_x`, normalized by
/// `max(‖b‖, 1)`.
pub fn check_stopping(
    state: &SolverState,
    new_x: &[Block],
    problem: &Problem,
    steps: &StepSizes,
    rule: &ResidualRule,
    eps1: f64,
    eps2: f64,
) -> Result<StoppingCheck> {
    state.check(problem)?;
    steps.check(problem.len())?;
    let scale = problem.rhs_scale();
    let feasibility = problem.residual(new_x)?.norm() / scale;
    let update = match rule {
        ResidualRule::Step => step_residual(&steps.eta, state.beta, &state.x, new_x, scale),
        ResidualRule::Kkt { norms } => {
            if norms.len() != problem.len() {
                return Err(Error::Dimension {
                    context: "operator norms",
                    expected: (problem.len(), 1),
                    found: (norms.len(), 1),
                });
            }
            let grads = problem
                .blocks()
                .iter()
                .zip(state.x.iter().zip(new_x))
                .map(|(spec, (a, b))| match spec.term.smooth_part() {
                    Some(g) => Ok((Some(g.gradient(a)?), Some(g.gradient(b)?))),
                    None => Ok((None, None)),
                })
                .collect::<Result<Vec<_>>>()?;
            kkt_residual(steps, norms, state.beta, &state.x, new_x, &grads, scale)
        }
    };
    Ok(StoppingCheck {
        feasibility_ok: feasibility < eps1,
        update_ok: update < eps2,
        residuals: Residuals {
            feasibility,
            update,
        },
    })
}
