//! Closed-form proximal maps and the smooth losses used by the solvers.
//!
//! The proximal map of `h` with weight `σ > 0` is
//! `argmin_x h(x) + (σ/2)‖x − w‖²`. Every routine here is a pure function;
//! the brute-force references that check them live in [`crate::oracle`].

use nalgebra::{DMatrix, DVector};

use crate::block::Block;
use crate::error::{check_shape, Error, Result};
use crate::spectral;
pub use crate::spectral::ThinSvd;

/// Convex sets with an explicit projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexSet {
    Nonnegative,
}

impl ConvexSet {
    pub fn project(&self, w: &Block) -> Block {
        match self {
            ConvexSet::Nonnegative => project_nonneg(w),
        }
    }

    pub fn contains(&self, x: &Block) -> bool {
        match self {
            ConvexSet::Nonnegative => x.as_slice().iter().all(|v| *v >= 0.0),
        }
    }
}

/// Soft thresholding: entrywise `sgn(w)·max(|w| − eps, 0)`.
pub fn prox_l1(w: &Block, eps: f64) -> Result<Block> {
    check_threshold(eps)?;
    Ok(Block::wrap(w.as_matrix().map(|v| soft_threshold(v, eps))))
}

#[inline]
pub(crate) fn soft_threshold(v: f64, eps: f64) -> f64 {
    if v > eps {
        v - eps
    } else if v < -eps {
        v + eps
    } else {
        0.0
    }
}

fn check_threshold(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold must be finite and nonnegative, got {eps}"
        )))
    }
}

/// Thin singular value decomposition `W = U diag(s) Vᵀ`.
/// Source of singular value decompositions for [`prox_nuclear_with`].
///
/// A backend may return only the leading triplets (a truncated SVD), as
/// long as every singular value above the threshold in use is included.
pub trait SvdBackend: Send + Sync {
    fn decompose(&self, w: &DMatrix<f64>) -> Result<ThinSvd>;
}

/// Dense thin decomposition, see [`crate::spectral`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FullSvd;

impl SvdBackend for FullSvd {
    fn decompose(&self, w: &DMatrix<f64>) -> Result<ThinSvd> {
        spectral::thin_svd(w)
    }
}

/// Singular value thresholding `U·max(Σ − eps, 0)·Vᵀ` with a full SVD.
pub fn prox_nuclear(w: &Block, eps: f64) -> Result<Block> {
    prox_nuclear_with(w, eps, &FullSvd)
}

pub fn prox_nuclear_with(w: &Block, eps: f64, backend: &dyn SvdBackend) -> Result<Block> {
    check_threshold(eps)?;
    if eps == 0.0 {
        return Ok(w.clone());
    }
    let svd = backend.decompose(w.as_matrix())?;
    let (rows, cols) = w.shape();
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > eps)
        .collect();
    if kept.is_empty() {
        return Ok(Block::zeros(rows, cols));
    }
    let mut left = DMatrix::zeros(rows, kept.len());
    let mut right = DMatrix::zeros(kept.len(), cols);
    for (slot, &k) in kept.iter().enumerate() {
        let shrunk = svd.singular_values[k] - eps;
        left.set_column(slot, &(svd.u.column(k) * shrunk));
        right.set_row(slot, &svd.v_t.row(k));
    }
    Ok(Block::wrap(left * right))
}

/// Minimizer of `(1/2μ)‖e‖² + (σ/2)‖e − w‖²`, i.e. `w·μσ/(μσ + 1)`.
pub fn prox_sq_frobenius(w: &Block, mu: f64, sigma: f64) -> Result<Block> {
    if !(mu > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu and sigma must be positive, got mu={mu}, sigma={sigma}"
        )));
    }
    let factor = mu * sigma / (mu * sigma + 1.0);
    Ok(w.scaled(factor))
}

/// Block soft thresholding over consecutive groups of a column vector.
pub fn prox_group_l2(w: &Block, eps: f64, group_sizes: &[usize]) -> Result<Block> {
    check_threshold(eps)?;
    check_groups(w.shape(), group_sizes)?;
    let mut out = w.as_matrix().clone();
    let mut start = 0;
    for &size in group_sizes {
        let group = &mut out.as_mut_slice()[start..start + size];
        let norm = group.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if norm > 0.0 {
            (1.0 - eps / norm).max(0.0)
        } else {
            0.0
        };
        if scale != 1.0 {
            group.iter_mut().for_each(|v| *v *= scale);
        }
        start += size;
    }
    Ok(Block::wrap(out))
}

fn check_groups(shape: (usize, usize), group_sizes: &[usize]) -> Result<()> {
    let total: usize = group_sizes.iter().sum();
    if shape.1 != 1 || total != shape.0 {
        return Err(Error::Dimension {
            context: "group sizes",
            expected: (total, 1),
            found: shape,
        });
    }
    Ok(())
}

/// Entrywise `max(w, 0)`.
pub fn project_nonneg(w: &Block) -> Block {
    Block::wrap(w.as_matrix().map(|v| v.max(0.0)))
}

fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    spectral::nuclear_norm(x).unwrap_or(f64::NAN)
}

/// Average logistic loss `(1/s) Σ log(1 + exp(−y_i w̄ᵀx̄_i))` over the
/// columns `x̄_i` of `xbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticLoss {
    xbar: DMatrix<f64>,
    labels: DVector<f64>,
    lipschitz: f64,
}

impl LogisticLoss {
    pub fn new(xbar: DMatrix<f64>, labels: &Block) -> Result<Self> {
        let s = xbar.ncols();
        if s == 0 {
            return Err(Error::InvalidInput(
                "logistic loss needs at least one sample".into(),
            ));
        }
        check_shape("logistic labels", (s, 1), labels.shape())?;
        if let Some(bad) = labels.as_slice().iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::InvalidInput(format!(
                "labels must be ±1, found {bad}"
            )));
        }
        if xbar.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "logistic design has non-finite entries".into(),
            ));
        }
        let spectral = spectral::spectral_norm(&xbar)?;
        Ok(LogisticLoss {
            lipschitz: spectral * spectral / (4.0 * s as f64),
            labels: DVector::from_column_slice(labels.as_slice()),
            xbar,
        })
    }

    pub fn samples(&self) -> usize {
        self.xbar.ncols()
    }

    pub fn dim(&self) -> usize {
        self.xbar.nrows()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.xbar
    }

    /// `(1/(4s))·‖X̄‖₂²`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    pub fn value_grad(&self, wbar: &Block) -> Result<(f64, Block)> {
        check_shape("logistic weights", (self.dim(), 1), wbar.shape())?;
        let s = self.samples() as f64;
        let margins = self.xbar.tr_mul(wbar.as_matrix());
        let mut value = 0.0;
        let mut weights = DMatrix::zeros(self.samples(), 1);
        for i in 0..self.samples() {
            let y = self.labels[i];
            let m = y * margins[(i, 0)];
            value += softplus(-m);
            // d/dm log(1 + e^{-m}) = -1/(1 + e^{m})
            weights[(i, 0)] = -y * logistic(-m) / s;
        }
        Ok((value / s, Block::wrap(&self.xbar * weights)))
    }
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Loss value and gradient of the average logistic loss.
pub fn logistic_value_grad(wbar: &Block, xbar: &Block, y: &Block) -> Result<(f64, Block)> {
    LogisticLoss::new(xbar.as_matrix().clone(), y)?.value_grad(wbar)
}

/// Nonsmooth terms `h` whose proximal map is available in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxTerm {
    Zero,
    /// `weight·‖x‖₁`
    L1 {
        weight: f64,
    },
    /// `weight·‖x‖_*`
    Nuclear {
        weight: f64,
    },
    /// `(1/2μ)‖x‖²`
    SqFrobenius {
        mu: f64,
    },
    /// `weight·Σ_j ‖x_j‖` over consecutive groups.
    GroupL2 {
        weight: f64,
        group_sizes: Vec<usize>,
    },
    Indicator(ConvexSet),
    /// `(weight/2)‖x − center‖²`
    Quadratic {
        weight: f64,
        center: Block,
    },
}

impl ProxTerm {
    pub fn value(&self, x: &Block) -> f64 {
        match self {
            ProxTerm::Zero => 0.0,
            ProxTerm::L1 { weight } => weight * x.as_slice().iter().map(|v| v.abs()).sum::<f64>(),
            ProxTerm::Nuclear { weight } => weight * nuclear_norm(x.as_matrix()),
            ProxTerm::SqFrobenius { mu } => x.norm_squared() / (2.0 * mu),
            ProxTerm::GroupL2 {
                weight,
                group_sizes,
            } => {
                let mut start = 0;
                let mut total = 0.0;
                for &size in group_sizes {
                    let g = &x.as_slice()[start..start + size];
                    total += g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    start += size;
                }
                weight * total
            }
            ProxTerm::Indicator(set) => {
                if set.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxTerm::Quadratic { weight, center } => 0.5 * weight * x.distance(center).powi(2),
        }
    }

    /// `argmin_x h(x) + (σ/2)‖x − w‖²`.
    pub fn prox(&self, w: &Block, sigma: f64) -> Result<Block> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "proximal weight must be positive, got {sigma}"
            )));
        }
        match self {
            ProxTerm::Zero => Ok(w.clone()),
            ProxTerm::L1 { weight } => prox_l1(w, weight / sigma),
            ProxTerm::Nuclear { weight } => prox_nuclear(w, weight / sigma),
            ProxTerm::SqFrobenius { mu } => prox_sq_frobenius(w, *mu, sigma),
            ProxTerm::GroupL2 {
                weight,
                group_sizes,
            } => prox_group_l2(w, weight / sigma, group_sizes),
            ProxTerm::Indicator(set) => Ok(set.project(w)),
            ProxTerm::Quadratic { weight, center } => {
                check_shape("quadratic center", center.shape(), w.shape())?;
                let denom = weight + sigma;
                Ok(Block::wrap(
                    (center.as_matrix() * *weight + w.as_matrix() * sigma) / denom,
                ))
            }
        }
    }

    fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        match self {
            ProxTerm::GroupL2 { group_sizes, .. } => check_groups(shape, group_sizes),
            ProxTerm::Quadratic { center, .. } => {
                check_shape("quadratic center", shape, center.shape())
            }
            ProxTerm::SqFrobenius { mu } if *mu <= 0.0 => Err(Error::InvalidParameter(format!(
                "mu must be positive, got {mu}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Smooth terms `g` with Lipschitz gradients.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothTerm {
    Logistic(LogisticLoss),
    /// `(weight/2)‖x − center‖²`
    Quadratic {
        weight: f64,
        center: Block,
    },
}

impl SmoothTerm {
    pub fn value(&self, x: &Block) -> f64 {
        match self {
            SmoothTerm::Logistic(loss) => loss.value_grad(x).map(|(v, _)| v).unwrap_or(f64::NAN),
            SmoothTerm::Quadratic { weight, center } => 0.5 * weight * x.distance(center).powi(2),
        }
    }

    pub fn gradient(&self, x: &Block) -> Result<Block> {
        match self {
            SmoothTerm::Logistic(loss) => loss.value_grad(x).map(|(_, g)| g),
            SmoothTerm::Quadratic { weight, center } => {
                check_shape("quadratic center", center.shape(), x.shape())?;
                Ok(x.sub(center).scaled(*weight))
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            SmoothTerm::Logistic(loss) => loss.lipschitz_bound(),
            SmoothTerm::Quadratic { weight, .. } => *weight,
        }
    }

    fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        match self {
            SmoothTerm::Logistic(loss) => check_shape("logistic weights", (loss.dim(), 1), shape),
            SmoothTerm::Quadratic { center, .. } => {
                check_shape("quadratic center", shape, center.shape())
            }
        }
    }
}

/// Objective component `f_i` of one block.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// `h` with a closed-form proximal map.
    Prox(ProxTerm),
    /// `g` with gradient and Lipschitz bound only.
    Smooth(SmoothTerm),
    /// `g + h`.
    Composite { smooth: SmoothTerm, prox: ProxTerm },
}

impl Term {
    pub fn zero() -> Self {
        Term::Prox(ProxTerm::Zero)
    }

    pub fn indicator(set: ConvexSet) -> Self {
        Term::Prox(ProxTerm::Indicator(set))
    }

    pub fn value(&self, x: &Block) -> f64 {
        match self {
            Term::Prox(h) => h.value(x),
            Term::Smooth(g) => g.value(x),
            Term::Composite { smooth, prox } => smooth.value(x) + prox.value(x),
        }
    }

    pub fn smooth_part(&self) -> Option<&SmoothTerm> {
        match self {
            Term::Prox(_) => None,
            Term::Smooth(g) | Term::Composite { smooth: g, .. } => Some(g),
        }
    }

    pub fn prox_part(&self) -> &ProxTerm {
        match self {
            Term::Prox(h) | Term::Composite { prox: h, .. } => h,
            Term::Smooth(_) => &ProxTerm::Zero,
        }
    }

    /// Lipschitz constant of the smooth part (zero when there is none).
    pub fn lipschitz(&self) -> f64 {
        self.smooth_part().map_or(0.0, SmoothTerm::lipschitz)
    }

    /// Proximal map of the whole term. Smooth parts are supported only when
    /// they are quadratic and the nonsmooth part is zero.
    pub fn prox(&self, w: &Block, sigma: f64) -> Result<Block> {
        match self {
            Term::Prox(h) => h.prox(w, sigma),
            Term::Smooth(SmoothTerm::Quadratic { weight, center })
            | Term::Composite {
                smooth: SmoothTerm::Quadratic { weight, center },
                prox: ProxTerm::Zero,
            } => ProxTerm::Quadratic {
                weight: *weight,
                center: center.clone(),
            }
            .prox(w, sigma),
            _ => Err(Error::Unsupported(
                "no closed-form proximal map for this term; use the proximal variant".into(),
            )),
        }
    }

    pub(crate) fn has_closed_prox(&self) -> bool {
        matches!(
            self,
            Term::Prox(_)
                | Term::Smooth(SmoothTerm::Quadratic { .. })
                | Term::Composite {
                    smooth: SmoothTerm::Quadratic { .. },
                    prox: ProxTerm::Zero
                }
        )
    }

    pub(crate) fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        match self {
            Term::Prox(h) => h.check_shape(shape),
            Term::Smooth(g) => g.check_shape(shape),
            Term::Composite { smooth, prox } => {
                smooth.check_shape(shape)?;
                prox.check_shape(shape)
            }
        }
    }
}
