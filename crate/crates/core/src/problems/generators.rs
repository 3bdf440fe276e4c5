//! Seeded synthetic data. Every generator draws from a `ChaCha20Rng`
//! created with `seed_from_u64(seed)`, so data depend only on the spec.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::block::Block;
use crate::error::{Error, Result};
use crate::spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct LatentLrrSpec {
    /// Number of subspaces.
    pub s: usize,
    /// Points per subspace.
    pub p: usize,
    /// Ambient dimension.
    pub d: usize,
    /// Intrinsic dimension.
    pub r_tilde: usize,
    pub mu: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmcSpec {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    /// Fraction of observed entries.
    pub q: f64,
    /// Standard deviation of the noise added to observations.
    pub noise: f64,
    pub mu: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupLogisticSpec {
    /// Number of groups; the weight has `p = 9t + 1` coordinates.
    pub t: usize,
    /// Number of samples.
    pub s: usize,
    /// Number of active groups.
    pub q: usize,
    pub mu: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmcData {
    pub x0: Block,
    /// Observations in the order of `omega`.
    pub b_obs: Block,
    /// Observed entries, sorted row-major.
    pub omega: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupLogisticData {
    /// `p × s`, one sample per column.
    pub x: Block,
    pub y: Block,
    pub groups: Vec<Vec<usize>>,
    /// Coordinates of the true support, ascending.
    pub support: Vec<usize>,
    /// Indices of the active groups, ascending.
    pub active_groups: Vec<usize>,
}

fn gaussian(rng: &mut ChaCha20Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// `s` random `r̃`-dimensional subspaces of `R^d` with `p` points each.
///
/// Each basis is the Q factor of a standard normal `d × r̃` matrix, and the
/// coefficients are standard normal. No noise is added. Columns are
/// grouped by subspace.
pub fn gen_latent_lrr_data(spec: &LatentLrrSpec) -> Result<Block> {
    let LatentLrrSpec {
        s, p, d, r_tilde, ..
    } = *spec;
    if s == 0 || p == 0 || d == 0 || r_tilde == 0 || r_tilde > d {
        return Err(Error::InvalidParameter(format!(
            "need s, p, d, r_tilde >= 1 and r_tilde <= d, got ({s}, {p}, {d}, {r_tilde})"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut x = DMatrix::zeros(d, s * p);
    for k in 0..s {
        let basis = gaussian(&mut rng, d, r_tilde).qr().q();
        let coeffs = gaussian(&mut rng, r_tilde, p);
        x.columns_mut(k * p, p).copy_from(&(basis * coeffs));
    }
    Ok(Block::wrap(x))
}

/// Nonnegative rank-`r` truth, a uniformly sampled observation set of size
/// `round(q·m·n)` and noisy observations.
///
/// The truth is the rank-`r` truncated SVD of `A Bᵀ` with `A`, `B` uniform on
/// `[0, 1]` with `r` columns, clamped at zero. `A Bᵀ` already has rank `r`
/// and nonnegative entries, so truncation and clamping only remove rounding
/// noise and the result has rank exactly `r`.
pub fn gen_nmc_data(spec: &NmcSpec) -> Result<NmcData> {
    let NmcSpec {
        m,
        n,
        rank,
        q,
        noise,
        ..
    } = *spec;
    if m == 0 || n == 0 || rank == 0 || rank > m.min(n) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= rank <= min(m, n), got m={m}, n={n}, rank={rank}"
        )));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sample ratio must lie in (0, 1], got {q}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise must be nonnegative, got {noise}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let a = DMatrix::from_fn(m, rank, |_, _| rng.random::<f64>());
    let b = DMatrix::from_fn(n, rank, |_, _| rng.random::<f64>());
    let x0 = truncate_rank(&(a * b.transpose()), rank)?.map(|v| v.max(0.0));

    let count = ((q * (m * n) as f64).round() as usize).clamp(1, m * n);
    let mut picked = index::sample(&mut rng, m * n, count).into_vec();
    picked.sort_unstable();
    // Linear index in row-major order.
    let omega: Vec<(usize, usize)> = picked.iter().map(|&k| (k / n, k % n)).collect();
    let dist = Normal::new(0.0, noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let obs: Vec<f64> = omega
        .iter()
        .map(|&(r, c)| {
            let e = if noise > 0.0 {
                dist.sample(&mut rng)
            } else {
                0.0
            };
            x0[(r, c)] + e
        })
        .collect();
    Ok(NmcData {
        x0: Block::wrap(x0),
        b_obs: Block::wrap(DMatrix::from_column_slice(count, 1, &obs)),
        omega,
    })
}

fn truncate_rank(m: &DMatrix<f64>, rank: usize) -> Result<DMatrix<f64>> {
    let svd = spectral::thin_svd(m)?;
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for k in 0..rank.min(svd.singular_values.len()) {
        out += svd.u.column(k) * svd.singular_values[k] * svd.v_t.row(k);
    }
    Ok(out)
}

/// Groups of ten consecutive coordinates where neighbours share one
/// coordinate: `{0..9}, {9..18}, …`, covering `p = 9t + 1` coordinates.
pub fn overlapping_groups(t: usize) -> Vec<Vec<usize>> {
    (0..t).map(|j| (9 * j..9 * j + 10).collect()).collect()
}

/// Data for overlapping group sparse logistic regression.
///
/// `q` groups are chosen at random; the support is their union minus any
/// coordinate shared with an unchosen group. Labels alternate `1, −1, …`.
/// Entry `(i, j)` is uniform on `[0.5, 1.5]` when `i` is in the support and
/// `y_j = 1`, on `[−1.5, −0.5]` when `i` is in the support and `y_j = −1`,
/// and on `[−0.5, 0.5]` otherwise.
pub fn gen_group_logistic_data(spec: &GroupLogisticSpec) -> Result<GroupLogisticData> {
    let GroupLogisticSpec { t, s, q, .. } = *spec;
    if t == 0 || s == 0 || q > t {
        return Err(Error::InvalidParameter(format!(
            "need t >= 1, s >= 1 and q <= t, got t={t}, s={s}, q={q}"
        )));
    }
    let p = 9 * t + 1;
    let groups = overlapping_groups(t);
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut active_groups = index::sample(&mut rng, t, q).into_vec();
    active_groups.sort_unstable();

    let mut chosen = vec![false; p];
    let mut unchosen = vec![false; p];
    for (j, g) in groups.iter().enumerate() {
        let mark = if active_groups.contains(&j) {
            &mut chosen
        } else {
            &mut unchosen
        };
        for &i in g {
            mark[i] = true;
        }
    }
    let support: Vec<usize> = (0..p).filter(|&i| chosen[i] && !unchosen[i]).collect();

    let labels: Vec<f64> = (0..s)
        .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut in_support = vec![false; p];
    for &i in &support {
        in_support[i] = true;
    }
    let x = DMatrix::from_fn(p, s, |i, j| {
        if in_support[i] {
            let v = rng.random_range(0.5..=1.5);
            if labels[j] > 0.0 {
                v
            } else {
                -v
            }
        } else {
            rng.random_range(-0.5..=0.5)
        }
    });
    Ok(GroupLogisticData {
        x: Block::wrap(x),
        y: Block::wrap(DMatrix::from_column_slice(s, 1, &labels)),
        groups,
        support,
        active_groups,
    })
}
