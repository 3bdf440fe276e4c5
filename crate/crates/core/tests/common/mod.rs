#![allow(dead_code)]

use ladmpsap::{
    lift_with_sets, solve, Block, BlockSpec, LinearMap, Problem, SmoothTerm, SolveReport,
    SolverConfig, Status, Term, Variant,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut ChaCha20Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_block(rng: &mut ChaCha20Rng, r: usize, c: usize) -> Block {
    Block::new(gaussian(rng, r, c)).unwrap()
}

/// `min Σ ½w_i‖x_i − c_i‖²` s.t. `Σ A_i x_i = b` with Gaussian data,
/// block sizes in `1..=max_dim` and at most `min(6, Σ d_i)` rows.
pub fn random_qp(rng: &mut ChaCha20Rng, n: usize, max_dim: usize) -> Problem {
    let dims: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_dim)).collect();
    let total: usize = dims.iter().sum();
    let m = rng.random_range(1..=total.min(6));
    let blocks = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let term = Term::Smooth(SmoothTerm::Quadratic {
                weight: rng.random_range(0.5..2.0),
                center: gaussian_block(rng, d, 1),
            });
            BlockSpec::new(
                format!("x{i}"),
                term,
                LinearMap::dense(gaussian(rng, m, d)).unwrap(),
            )
        })
        .collect();
    let b = gaussian_block(rng, m, 1);
    Problem::new(blocks, b).unwrap()
}

/// Scalar blocks `min Σ ½w_i(x_i − c_i)²` s.t. `Σ a_i x_i = b`.
pub fn scalar_qp(rng: &mut ChaCha20Rng, n: usize) -> Problem {
    let blocks = (0..n)
        .map(|i| {
            let term = Term::Smooth(SmoothTerm::Quadratic {
                weight: rng.random_range(0.5..2.0),
                center: Block::scalar(StandardNormal.sample(rng)).unwrap(),
            });
            let a = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            BlockSpec::new(
                format!("x{i}"),
                term,
                LinearMap::dense(DMatrix::from_element(1, 1, a)).unwrap(),
            )
        })
        .collect();
    Problem::new(blocks, Block::scalar(StandardNormal.sample(rng)).unwrap()).unwrap()
}

/// Approximate KKT point for the problem that produced `report`: continue
/// from its final state with `Ladmpsap` until both residuals fall below `tol`
/// or `max_iter` runs out. Lifted problems are rebuilt with
/// `lift_with_sets`. Returns the point and its relative feasibility.
pub fn tight_reference(
    problem: &Problem,
    report: &SolveReport,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Block>, Block, f64), String> {
    let solved = if report.x.len() > problem.len() {
        lift_with_sets(problem).map_err(|e| e.to_string())?
    } else {
        problem.clone()
    };
    let blocks = solved
        .blocks()
        .iter()
        .zip(&report.x)
        .map(|(b, x)| b.clone().with_x0(x.clone()))
        .collect();
    let warm = Problem::new(blocks, solved.rhs().clone()).map_err(|e| e.to_string())?;
    let mut cfg = SolverConfig::new(Variant::Ladmpsap)
        .with_tolerances(tol, tol)
        .with_beta0(report.beta)
        .with_max_iter(max_iter);
    cfg.lambda0 = Some(report.lambda.clone());
    let r = solve(&warm, &cfg).map_err(|e| e.to_string())?;
    match r.status {
        Status::Converged | Status::MaxIter => Ok((r.x, r.lambda, r.feasibility)),
        other => Err(format!("reference run stopped with {other}")),
    }
}

/// Largest increase `Q_{k+1} − Q_k` relative to `max(Q_0, 1)`.
pub fn worst_fejer_increase(q: &[f64]) -> f64 {
    let scale = q.first().copied().unwrap_or(1.0).max(1.0);
    q.windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::NEG_INFINITY, f64::max)
}
