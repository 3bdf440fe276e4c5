//! Dense singular value decompositions, backed by faer.
//!
//! nalgebra's SVD returns wrong factors for some exactly rank-deficient
//! inputs (the reconstruction error can be of the order of the matrix
//! itself), which are routine here: thresholded iterates and low-rank data.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `U diag(s) Vᵀ` with `U` of size `m × k`, `Vᵀ` of size `k × n` and
/// `k = min(m, n)`. Singular values are nonincreasing.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "SVD input {}x{} has non-finite entries",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn thin_svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(ThinSvd {
            u: DMatrix::zeros(rows, 0),
            singular_values: DVector::zeros(0),
            v_t: DMatrix::zeros(0, cols),
        });
    }
    let svd = to_faer(m).thin_svd().map_err(|e| {
        Error::Numeric(format!(
            "SVD of {rows}x{cols} matrix (Frobenius norm {:.6e}) did not converge: {e:?}",
            m.norm()
        ))
    })?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok(ThinSvd {
        u: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| s[i]),
        v_t: DMatrix::from_fn(k, cols, |i, j| v[(j, i)]),
    })
}

/// Nonincreasing singular values.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = to_faer(m)
        .singular_values()
        .map_err(|e| Error::Numeric(format!("singular values did not converge: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest singular value, `0` for empty input.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}
