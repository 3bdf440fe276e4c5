//! Dense real blocks: the variable groups, right-hand sides and multipliers
//! the solvers move around. A vector is a single-column block.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A dense real matrix with finite entries.
///
/// Blocks built through [`Block::new`] are checked for finiteness. Solver
/// iterates are wrapped without the check so that a diverging run can be
/// detected and reported instead of failing mid-iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Block(DMatrix<f64>);

impl Block {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "block entries must be finite, found {bad}"
            )));
        }
        Ok(Block(data))
    }

    /// Column-major construction, like [`DMatrix::from_column_slice`].
    pub fn from_column_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "Block::from_column_slice",
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Block::new(DMatrix::from_column_slice(rows, cols, data))
    }

    /// Row-major construction, convenient for literals in tests and configs.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "Block::from_row_slice",
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Block::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn vector(values: &[f64]) -> Result<Self> {
        Block::from_column_slice(values.len(), 1, values)
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Block::vector(&[value])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Block(DMatrix::zeros(rows, cols))
    }

    pub(crate) fn wrap(data: DMatrix<f64>) -> Self {
        Block(data)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// Trace inner product `<self, other>`.
    pub fn dot(&self, other: &Block) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Block {
        Block(&self.0 * factor)
    }

    pub fn sub(&self, other: &Block) -> Block {
        Block(&self.0 - &other.0)
    }

    pub fn add(&self, other: &Block) -> Block {
        Block(&self.0 + &other.0)
    }

    /// Distance in Frobenius norm.
    pub fn distance(&self, other: &Block) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<f64> for Block {
    fn from(value: f64) -> Self {
        Block(DMatrix::from_element(1, 1, value))
    }
}

impl AsRef<DMatrix<f64>> for Block {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}
