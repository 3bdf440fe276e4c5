//! Linearly constrained separable programs `min Σ f_i(x_i)` subject to
//! `Σ A_i(x_i) = b` and optional `x_i ∈ X_i`.

use nalgebra::DMatrix;

use crate::block::Block;
use crate::error::{check_shape, Error, Result};
use crate::linops::LinearMap;
pub use crate::prox::ConvexSet;
use crate::prox::Term;

/// One variable group with its objective term, map and starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub term: Term,
    pub map: LinearMap,
    pub x0: Block,
    pub set: Option<ConvexSet>,
}

impl BlockSpec {
    /// A block starting at zero with no set constraint.
    pub fn new(name: impl Into<String>, term: Term, map: LinearMap) -> Self {
        let (r, c) = map.input_shape();
        BlockSpec {
            name: name.into(),
            term,
            map,
            x0: Block::zeros(r, c),
            set: None,
        }
    }

    pub fn with_x0(mut self, x0: Block) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_set(mut self, set: ConvexSet) -> Self {
        self.set = Some(set);
        self
    }
}

/// A validated problem. Shapes are checked once here so the solver loop
/// does not have to.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    blocks: Vec<BlockSpec>,
    rhs: Block,
}

impl Problem {
    pub fn new(blocks: Vec<BlockSpec>, rhs: Block) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput(
                "a problem needs at least one block".into(),
            ));
        }
        if !rhs.is_finite() {
            return Err(Error::InvalidInput(
                "right-hand side has non-finite entries".into(),
            ));
        }
        for spec in &blocks {
            check_shape("map output vs rhs", rhs.shape(), spec.map.output_shape())?;
            check_shape(
                "initial point vs map input",
                spec.map.input_shape(),
                spec.x0.shape(),
            )?;
            if !spec.x0.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "initial point of block '{}' has non-finite entries",
                    spec.name
                )));
            }
            spec.term.check_shape(spec.x0.shape())?;
        }
        if blocks.iter().all(|b| b.map.is_zero()) {
            return Err(Error::InvalidInput("every linear map is zero".into()));
        }
        Ok(Problem { blocks, rhs })
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn rhs(&self) -> &Block {
        &self.rhs
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn has_sets(&self) -> bool {
        self.blocks.iter().any(|b| b.set.is_some())
    }

    pub fn initial_point(&self) -> Vec<Block> {
        self.blocks.iter().map(|b| b.x0.clone()).collect()
    }

    /// `max(‖b‖, 1)`, the normalizer of every relative residual.
    pub fn rhs_scale(&self) -> f64 {
        self.rhs.norm().max(1.0)
    }

    fn check_point(&self, x: &[Block]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::Dimension {
                context: "block count",
                expected: (self.len(), 1),
                found: (x.len(), 1),
            });
        }
        for (spec, xi) in self.blocks.iter().zip(x) {
            check_shape("block shape", spec.map.input_shape(), xi.shape())?;
        }
        Ok(())
    }

    /// `Σ A_i(x_i)` without the shape checks.
    pub(crate) fn combined_raw(&self, x: &[Block]) -> DMatrix<f64> {
        let mut sum = DMatrix::zeros(self.rhs.shape().0, self.rhs.shape().1);
        for (spec, xi) in self.blocks.iter().zip(x) {
            sum += spec.map.apply_raw(xi.as_matrix());
        }
        sum
    }

    /// `Σ A_i(x_i) − b`.
    pub fn residual(&self, x: &[Block]) -> Result<Block> {
        self.check_point(x)?;
        Ok(Block::wrap(self.combined_raw(x) - self.rhs.as_matrix()))
    }

    /// `Σ f_i(x_i)`, including indicator values of the blocks' terms but
    /// not of their sets.
    pub fn objective(&self, x: &[Block]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self
            .blocks
            .iter()
            .zip(x)
            .map(|(spec, xi)| spec.term.value(xi))
            .sum())
    }

    /// `‖Σ A_i(x_i) − b‖ / max(‖b‖, 1)`.
    pub fn relative_feasibility(&self, x: &[Block]) -> Result<f64> {
        Ok(self.residual(x)?.norm() / self.rhs_scale())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::{ProxTerm, SmoothTerm};

    fn scalar_block(name: &str) -> BlockSpec {
        BlockSpec::new(
            name,
            Term::Prox(ProxTerm::Zero),
            LinearMap::identity((1, 1), 1.0).unwrap(),
        )
    }

    #[test]
    fn residual_of_two_scalars() {
        let p = Problem::new(
            vec![scalar_block("a"), scalar_block("b")],
            Block::scalar(1.0).unwrap(),
        )
        .unwrap();
        let r = p
            .residual(&[Block::scalar(0.25).unwrap(), Block::scalar(2.0).unwrap()])
            .unwrap();
        assert_eq!(r.as_slice(), &[1.25]);
        assert!(p.residual(&[Block::scalar(0.0).unwrap()]).is_err());
    }

    #[test]
    fn rejects_mismatched_rhs() {
        let err = Problem::new(vec![scalar_block("a")], Block::zeros(2, 1));
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn rejects_all_zero_maps() {
        let spec = BlockSpec::new("z", Term::zero(), LinearMap::identity((1, 1), 0.0).unwrap());
        assert!(matches!(
            Problem::new(vec![spec], Block::scalar(1.0).unwrap()),
            Err(Error::InvalidInput(_))
        ));
        assert!(Problem::new(vec![], Block::scalar(1.0).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_term_shape() {
        let spec = BlockSpec::new(
            "q",
            Term::Smooth(SmoothTerm::Quadratic {
                weight: 1.0,
                center: Block::zeros(2, 1),
            }),
            LinearMap::identity((1, 1), 1.0).unwrap(),
        );
        assert!(Problem::new(vec![spec], Block::scalar(1.0).unwrap()).is_err());
    }

    #[test]
    fn zero_rhs_uses_unit_scale() {
        let p = Problem::new(vec![scalar_block("a")], Block::scalar(0.0).unwrap()).unwrap();
        assert_eq!(p.rhs_scale(), 1.0);
        let f = p
            .relative_feasibility(&[Block::scalar(3.0).unwrap()])
            .unwrap();
        assert_eq!(f, 3.0);
    }
}
