use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::block::Block;
use crate::error::{Error, Result};
use crate::linops::LinearMap;
use crate::problem::{BlockSpec, ConvexSet, Problem};
use crate::prox::{LogisticLoss, ProxTerm, SmoothTerm, Term};

/// `min ‖Z‖_* + ‖L‖_* + μ‖E‖₁` subject to `XZ + LX + E = X`.
///
/// Blocks are `Z` (`sp × sp`), `L` (`d × d`) and `E` (`d × sp`) for a
/// `d × sp` data matrix.
pub fn build_latent_lrr(x: &Block, mu: f64) -> Result<Problem> {
    if x.max_abs() == 0.0 {
        return Err(Error::InvalidInput(
            "latent LRR data must be nonzero".into(),
        ));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let (d, cols) = x.shape();
    let data = x.as_matrix().clone();
    let blocks = vec![
        BlockSpec::new(
            "Z",
            Term::Prox(ProxTerm::Nuclear { weight: 1.0 }),
            LinearMap::left_multiply(data.clone(), cols)?,
        ),
        BlockSpec::new(
            "L",
            Term::Prox(ProxTerm::Nuclear { weight: 1.0 }),
            LinearMap::right_multiply(data, d)?,
        ),
        BlockSpec::new(
            "E",
            Term::Prox(ProxTerm::L1 { weight: mu }),
            LinearMap::identity((d, cols), 1.0)?,
        ),
    ];
    Problem::new(blocks, x.clone())
}

/// `min ‖X‖_* + (1/2μ)‖E‖²` subject to `P_Ω(X) + E = b` and `X ≥ 0`.
///
/// `b_obs` lists the observations in the order of `omega`. The set
/// constraint is lifted by the practical variant.
pub fn build_nmc(
    b_obs: &Block,
    omega: &[(usize, usize)],
    shape: (usize, usize),
    mu: f64,
) -> Result<Problem> {
    if omega.is_empty() {
        return Err(Error::InvalidInput("no observed entries".into()));
    }
    if let Some(&(r, c)) = omega.iter().find(|(r, c)| *r >= shape.0 || *c >= shape.1) {
        return Err(Error::InvalidInput(format!(
            "observed index ({r}, {c}) lies outside {}x{}",
            shape.0, shape.1
        )));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let mask = LinearMap::mask(shape, omega.to_vec()).map_err(|e| match e {
        Error::InvalidParameter(m) => Error::InvalidInput(m),
        other => other,
    })?;
    let blocks = vec![
        BlockSpec::new("X", Term::Prox(ProxTerm::Nuclear { weight: 1.0 }), mask)
            .with_set(ConvexSet::Nonnegative),
        BlockSpec::new(
            "E",
            Term::Prox(ProxTerm::SqFrobenius { mu }),
            LinearMap::identity((omega.len(), 1), 1.0)?,
        ),
    ];
    Problem::new(blocks, b_obs.clone())
}

/// Stacked selection matrix `S̄ = (S, 0)` over `p + 1` coordinates, one row
/// per group member.
pub fn selection_matrix(groups: &[Vec<usize>], p: usize) -> Result<DMatrix<f64>> {
    let rows: usize = groups.iter().map(Vec::len).sum();
    let mut s = DMatrix::zeros(rows, p + 1);
    let mut row = 0;
    for (j, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::InvalidInput(format!("group {j} is empty")));
        }
        for &idx in group {
            if idx >= p {
                return Err(Error::InvalidInput(format!(
                    "group {j} references coordinate {idx} of a {p}-dimensional weight"
                )));
            }
            s[(row, idx)] = 1.0;
            row += 1;
        }
    }
    Ok(s)
}

/// `min (1/s) Σ log(1 + exp(−y_i w̄ᵀx̄_i)) + μ Σ ‖z_j‖` subject to
/// `S̄w̄ − z = 0`, with `x̄_i = (x_i, 1)`.
///
/// `x` is `p × s` with one sample per column. Blocks are `w̄` (smooth
/// logistic loss, map `S̄`) and `z` (group norm, map `−I`).
pub fn build_group_logistic(
    x: &Block,
    y: &Block,
    groups: &[Vec<usize>],
    mu: f64,
) -> Result<Problem> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let (p, s) = x.shape();
    let mut xbar = DMatrix::from_element(p + 1, s, 1.0);
    xbar.rows_mut(0, p).copy_from(x.as_matrix());
    let loss = LogisticLoss::new(xbar, y)?;
    let selection = selection_matrix(groups, p)?;
    let rows = selection.nrows();
    let group_sizes = groups.iter().map(Vec::len).collect();
    let blocks = vec![
        BlockSpec::new(
            "w",
            Term::Smooth(SmoothTerm::Logistic(loss)),
            LinearMap::dense(selection)?,
        ),
        BlockSpec::new(
            "z",
            Term::Prox(ProxTerm::GroupL2 {
                weight: mu,
                group_sizes,
            }),
            LinearMap::negated(LinearMap::identity((rows, 1), 1.0)?),
        ),
    ];
    Problem::new(blocks, Block::zeros(rows, 1))
}

/// `min Σ ‖x_i‖₁` subject to `Σ A_i x_i = b` with standard normal `A_i`
/// (`m × d`) and `b`. The `A_i` are drawn first, in block order and
/// column-major within a block, then `b`.
pub fn build_parallel_bp(n: usize, m: usize, d: usize, seed: u64) -> Result<Problem> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two blocks, got {n}"
        )));
    }
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter(
            "dimensions must be positive".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut gaussian =
        |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng));
    let maps: Vec<DMatrix<f64>> = (0..n).map(|_| gaussian(m, d)).collect();
    let b = gaussian(m, 1);
    let blocks = maps
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            Ok(BlockSpec::new(
                format!("x{}", i + 1),
                Term::Prox(ProxTerm::L1 { weight: 1.0 }),
                LinearMap::dense(a)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Problem::new(blocks, Block::wrap(b))
}
