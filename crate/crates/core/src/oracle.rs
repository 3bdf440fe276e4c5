//! Independent reference solutions for tests and experiment baselines.
//!
//! Nothing here shares code paths with the closed forms in [`crate::prox`]
//! or with the solver updates, except [`long_run_reference`], which is a
//! deliberately long solver run.

use nalgebra::{DMatrix, DVector};

use crate::block::Block;
use crate::error::{check_shape, Error, Result};
use crate::problem::Problem;
use crate::prox::{ConvexSet, ProxTerm, SmoothTerm, Term};
use crate::solver::{solve, SolverConfig, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    ClosedForm,
    LongRun,
    GridSearch,
}

/// A point `(x*, λ*)` with `Σ A_i(x_i*) = b` and `−A_i†(λ*) ∈ ∂f_i(x_i*)`,
/// up to the stated feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReference {
    /// Blocks of the problem that was solved (lifted for set-constrained
    /// problems).
    pub x_star: Vec<Block>,
    pub lambda_star: Block,
    /// One block per original block.
    pub solution: Vec<Block>,
    pub source: ReferenceSource,
    /// `‖Σ A_i(x_i*) − b‖ / max(‖b‖, 1)`.
    pub feasibility: f64,
}

/// Dense matrix of a map acting on `vec(x)`, built column by column.
pub fn materialize(map: &crate::linops::LinearMap) -> DMatrix<f64> {
    let (ir, ic) = map.input_shape();
    let (or, oc) = map.output_shape();
    let mut out = DMatrix::zeros(or * oc, ir * ic);
    let mut basis = DMatrix::zeros(ir, ic);
    for k in 0..ir * ic {
        basis.as_mut_slice()[k] = 1.0;
        let col = map.apply_raw(&basis);
        out.column_mut(k).copy_from_slice(col.as_slice());
        basis.as_mut_slice()[k] = 0.0;
    }
    out
}

fn quadratic_parts(term: &Term) -> Option<(f64, &Block)> {
    match term {
        Term::Prox(ProxTerm::Quadratic { weight, center })
        | Term::Smooth(SmoothTerm::Quadratic { weight, center })
        | Term::Composite {
            smooth: SmoothTerm::Quadratic { weight, center },
            prox: ProxTerm::Zero,
        } => Some((*weight, center)),
        _ => None,
    }
}

/// Solve `min Σ (w_i/2)‖x_i − c_i‖²` subject to `Σ A_i x_i = b` through the
/// linear system `[W Aᵀ; A 0] [x; λ] = [W c; b]`.
pub fn eq_qp_solve(problem: &Problem) -> Result<KktReference> {
    if problem.has_sets() {
        return Err(Error::Unsupported(
            "set constraints in a quadratic oracle".into(),
        ));
    }
    let mut weights = Vec::new();
    let mut centers = Vec::new();
    let mut maps = Vec::new();
    for spec in problem.blocks() {
        let (w, c) = quadratic_parts(&spec.term).ok_or_else(|| {
            Error::Unsupported(format!("block '{}' is not a quadratic term", spec.name))
        })?;
        if !(w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadratic weight {w} must be positive"
            )));
        }
        weights.push(w);
        centers.push(c);
        maps.push(materialize(&spec.map));
    }
    let dims: Vec<usize> = maps.iter().map(|a| a.ncols()).collect();
    let total: usize = dims.iter().sum();
    let m = problem.rhs().len();
    let size = total + m;
    let mut kkt = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    let mut offset = 0;
    for i in 0..maps.len() {
        let d = dims[i];
        for k in 0..d {
            kkt[(offset + k, offset + k)] = weights[i];
            rhs[offset + k] = weights[i] * centers[i].as_slice()[k];
        }
        kkt.view_mut((total, offset), (m, d)).copy_from(&maps[i]);
        kkt.view_mut((offset, total), (d, m))
            .copy_from(&maps[i].transpose());
        offset += d;
    }
    rhs.rows_mut(total, m)
        .copy_from_slice(problem.rhs().as_slice());

    let sv = crate::spectral::singular_values(&kkt)?;
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficient(format!(
            "KKT matrix of size {size} has condition estimate {:.3e}",
            smax / smin
        )));
    }
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::RankDeficient("LU solve failed".into()))?;

    let mut x_star = Vec::new();
    let mut offset = 0;
    for (spec, d) in problem.blocks().iter().zip(&dims) {
        let (r, c) = spec.map.input_shape();
        x_star.push(Block::wrap(DMatrix::from_column_slice(
            r,
            c,
            &sol.as_slice()[offset..offset + d],
        )));
        offset += d;
    }
    let (lr, lc) = problem.rhs().shape();
    let lambda_star = Block::wrap(DMatrix::from_column_slice(lr, lc, &sol.as_slice()[total..]));
    let feasibility = problem.relative_feasibility(&x_star)?;
    Ok(KktReference {
        solution: x_star.clone(),
        x_star,
        lambda_star,
        source: ReferenceSource::ClosedForm,
        feasibility,
    })
}

/// Largest violation of `w_i(x_i − c_i) + A_i†(λ) = 0` over the blocks of a
/// quadratic problem.
pub fn quadratic_stationarity(problem: &Problem, x: &[Block], lambda: &Block) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (spec, xi) in problem.blocks().iter().zip(x) {
        let (w, c) = quadratic_parts(&spec.term)
            .ok_or_else(|| Error::Unsupported("non-quadratic term".into()))?;
        let g = xi.sub(c).scaled(w).add(&spec.map.adjoint(lambda)?);
        worst = worst.max(g.max_abs());
    }
    Ok(worst)
}

/// Scalar objective of a separable term at one coordinate.
fn scalar_value(term: &ProxTerm, k: usize, x: f64) -> Option<f64> {
    Some(match term {
        ProxTerm::Zero => 0.0,
        ProxTerm::L1 { weight } => weight * x.abs(),
        ProxTerm::SqFrobenius { mu } => x * x / (2.0 * mu),
        ProxTerm::Indicator(ConvexSet::Nonnegative) => {
            if x >= 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        ProxTerm::Quadratic { weight, center } => {
            let d = x - center.as_slice()[k];
            0.5 * weight * d * d
        }
        ProxTerm::Nuclear { .. } | ProxTerm::GroupL2 { .. } => return None,
    })
}

/// Minimize `φ` over the grid `{k·step}` on `[lo, hi]`.
fn scan(lo: f64, hi: f64, step: f64, phi: impl Fn(f64) -> f64) -> f64 {
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    let mut best = (f64::INFINITY, 0.0);
    for k in first..=last {
        let x = k as f64 * step;
        let v = phi(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Brute-force `argmin h(x) + (σ/2)‖x − w‖²` on a grid of spacing `step`.
///
/// Separable terms are scanned coordinate by coordinate over an interval
/// containing `w`, `0` and the quadratic center; group norms are scanned
/// radially within each group. The nuclear norm is not separable and is
/// rejected; use [`nuclear_subgradient_residual`] for it.
pub fn prox_grid_oracle(term: &ProxTerm, sigma: f64, w: &Block, step: f64) -> Result<Block> {
    if !(sigma > 0.0 && step > 0.0) {
        return Err(Error::InvalidParameter(
            "sigma and step must be positive".into(),
        ));
    }
    let mut out = w.as_matrix().clone();
    match term {
        ProxTerm::Nuclear { .. } => {
            return Err(Error::Unsupported(
                "the nuclear norm is not separable; no grid oracle".into(),
            ))
        }
        ProxTerm::GroupL2 {
            weight,
            group_sizes,
        } => {
            if group_sizes.iter().sum::<usize>() != w.len() || w.shape().1 != 1 {
                return Err(Error::Dimension {
                    context: "grid oracle groups",
                    expected: (group_sizes.iter().sum(), 1),
                    found: w.shape(),
                });
            }
            let mut start = 0;
            for &size in group_sizes {
                let g = &mut out.as_mut_slice()[start..start + size];
                let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                // The minimizer points along w_j; scan its length.
                let t = scan(0.0, r, step, |t| {
                    weight * t + 0.5 * sigma * (t - r) * (t - r)
                })
                .max(0.0);
                let scale = if r > 0.0 { t / r } else { 0.0 };
                g.iter_mut().for_each(|v| *v *= scale);
                start += size;
            }
        }
        _ => {
            for (k, wk) in w.as_slice().iter().enumerate() {
                let center = match term {
                    ProxTerm::Quadratic { center, .. } => center.as_slice()[k],
                    _ => 0.0,
                };
                let lo = wk.min(0.0).min(center) - 1.0;
                let hi = wk.max(0.0).max(center) + 1.0;
                let x = scan(lo, hi, step, |x| {
                    scalar_value(term, k, x).expect("separable") + 0.5 * sigma * (x - wk) * (x - wk)
                });
                out.as_mut_slice()[k] = x;
            }
        }
    }
    Ok(Block::wrap(out))
}

/// Eigenpairs of the symmetric matrix `m`, eigenvalues nonincreasing.
fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let fm = faer::Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("oracle eigendecomposition failed: {e:?}")))?;
    let (vals, vecs) = (evd.S().column_vector(), evd.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let values = order.iter().map(|&k| vals[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok((values, vectors))
}

/// Distance of `g` from the subdifferential of `‖·‖_*` at `p`.
///
/// With `p = U_r Σ_r V_rᵀ`, `g ∈ ∂‖p‖_*` iff `U_rᵀ g V_r = I`,
/// `(I − U_r U_rᵀ) g V_r = 0`, `U_rᵀ g (I − V_r V_rᵀ) = 0` and
/// `‖(I − U_r U_rᵀ) g (I − V_r V_rᵀ)‖₂ ≤ 1`. Returns the sum of the
/// violations.
///
/// The factors come from the eigendecomposition of `pᵀp`, not from an SVD,
/// so singular values below `max(rank_tol, 1e-7·σ_max)` count as zero.
pub fn nuclear_subgradient_residual(p: &Block, g: &Block, rank_tol: f64) -> Result<f64> {
    check_shape("subgradient candidate", p.shape(), g.shape())?;
    let pm = p.as_matrix();
    let (rows, cols) = pm.shape();
    let (values, vectors) = symmetric_eigen(&pm.tr_mul(pm))?;
    let sigma: Vec<f64> = values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let cut = rank_tol.max(1e-7 * sigma.first().copied().unwrap_or(0.0));
    let kept = sigma.iter().take_while(|s| **s > cut).count();
    let vr = vectors.columns(0, kept).into_owned();
    let mut ur = pm * &vr;
    for (k, s) in sigma.iter().take(kept).enumerate() {
        ur.column_mut(k).scale_mut(1.0 / s);
    }
    let gm = g.as_matrix();
    let pu = DMatrix::identity(rows, rows) - &ur * ur.transpose();
    let pv = DMatrix::identity(cols, cols) - &vr * vr.transpose();
    let range = ur.transpose() * gm * &vr - DMatrix::identity(kept, kept);
    let left = &pu * gm * &vr;
    let right = ur.transpose() * gm * &pv;
    let rest = &pu * gm * &pv;
    let spectral = symmetric_eigen(&rest.tr_mul(&rest))?
        .0
        .first()
        .map_or(0.0, |l| l.max(0.0).sqrt());
    Ok(range.norm() + left.norm() + right.norm() + (spectral - 1.0).max(0.0))
}

/// Reference point from a long run: `ρ₀ = 1.01`, at most 2000 iterations
/// or until both residuals drop below `1e-8`. The penalty schedule keeps
/// the caller's `ε₂` and `β₀`, as does every other setting of `config`.
pub fn long_run_reference(problem: &Problem, config: &SolverConfig) -> Result<KktReference> {
    let mut cfg = config.clone();
    cfg.schedule.rho0 = 1.01;
    cfg.eps1 = 1e-8;
    cfg.stop_eps2 = Some(1e-8);
    cfg.max_iter = 2000;
    cfg.record_diagnostics = false;
    cfg.record_iterates = false;
    let report = solve(problem, &cfg)?;
    match report.status {
        Status::Diverged => Err(Error::Diverged(
            report.message.unwrap_or_else(|| "long run diverged".into()),
        )),
        Status::NumericError => Err(Error::Numeric(
            report.message.unwrap_or_else(|| "long run failed".into()),
        )),
        Status::Converged | Status::MaxIter => Ok(KktReference {
            x_star: report.x,
            lambda_star: report.lambda,
            solution: report.solution,
            source: ReferenceSource::LongRun,
            feasibility: report.feasibility,
        }),
    }
}
