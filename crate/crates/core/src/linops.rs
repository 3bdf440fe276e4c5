//! Linear maps `A_i` acting on blocks, their adjoints and operator norms,
//! plus the lifting that turns set constraints `x_i ∈ X_i` into extra
//! equality rows.
//!
//! Maps are immutable values. `apply`, `adjoint` and `op_norm` are pure and
//! can be called from several threads at once.

use nalgebra::DMatrix;

use crate::block::Block;
use crate::error::{check_shape, Error, Result};
use crate::problem::{BlockSpec, Problem};
use crate::prox::Term;

/// Default relative tolerance on the Rayleigh quotient for [`op_norm`].
pub const NORM_TOL: f64 = 1e-9;
/// Default iteration cap for [`op_norm`].
pub const NORM_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// `x ↦ M x` on column vectors.
    Dense(DMatrix<f64>),
    /// `x ↦ scale · x`.
    Identity {
        scale: f64,
    },
    /// Selects the listed entries into a column vector, in list order.
    Mask {
        indices: Vec<(usize, usize)>,
    },
    /// `Z ↦ X Z`.
    LeftMultiply(DMatrix<f64>),
    /// `L ↦ L X`.
    RightMultiply(DMatrix<f64>),
    /// Component maps written (vectorized, column-major) into a column at
    /// the given row offsets. Rows not covered by any part are zero.
    Stacked(Vec<StackedPart>),
    Negated(Box<LinearMap>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedPart {
    pub offset: usize,
    pub map: LinearMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    kind: MapKind,
    input_shape: (usize, usize),
    output_shape: (usize, usize),
}

/// Result of the power iteration in [`op_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LinearMap {
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&matrix, "dense map")?;
        let (rows, cols) = matrix.shape();
        Ok(LinearMap {
            kind: MapKind::Dense(matrix),
            input_shape: (cols, 1),
            output_shape: (rows, 1),
        })
    }

    pub fn identity(shape: (usize, usize), scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "identity scale must be finite, got {scale}"
            )));
        }
        Ok(LinearMap {
            kind: MapKind::Identity { scale },
            input_shape: shape,
            output_shape: shape,
        })
    }

    /// Entry selection `P_Ω` on a `shape` matrix. Duplicate or out-of-range
    /// indices are rejected.
    pub fn mask(shape: (usize, usize), indices: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; shape.0 * shape.1];
        for &(i, j) in &indices {
            if i >= shape.0 || j >= shape.1 {
                return Err(Error::InvalidInput(format!(
                    "mask index ({i}, {j}) outside {}x{}",
                    shape.0, shape.1
                )));
            }
            let flat = i + j * shape.0;
            if seen[flat] {
                return Err(Error::InvalidInput(format!(
                    "duplicate mask index ({i}, {j})"
                )));
            }
            seen[flat] = true;
        }
        let len = indices.len();
        Ok(LinearMap {
            kind: MapKind::Mask { indices },
            input_shape: shape,
            output_shape: (len, 1),
        })
    }

    /// `Z ↦ X Z` where `Z` has `cols` columns.
    pub fn left_multiply(x: DMatrix<f64>, cols: usize) -> Result<Self> {
        ensure_finite(&x, "left-multiply map")?;
        let (rows, inner) = x.shape();
        Ok(LinearMap {
            kind: MapKind::LeftMultiply(x),
            input_shape: (inner, cols),
            output_shape: (rows, cols),
        })
    }

    /// `L ↦ L X` where `L` has `rows` rows.
    pub fn right_multiply(x: DMatrix<f64>, rows: usize) -> Result<Self> {
        ensure_finite(&x, "right-multiply map")?;
        let (inner, cols) = x.shape();
        Ok(LinearMap {
            kind: MapKind::RightMultiply(x),
            input_shape: (rows, inner),
            output_shape: (rows, cols),
        })
    }

    /// Stacks `parts` into a column of length `len`. Every part must accept
    /// `input_shape` and fit inside the column at its offset.
    pub fn stacked(
        input_shape: (usize, usize),
        len: usize,
        parts: Vec<StackedPart>,
    ) -> Result<Self> {
        for part in &parts {
            check_shape("stacked part input", input_shape, part.map.input_shape)?;
            let (r, c) = part.map.output_shape;
            if part.offset + r * c > len {
                return Err(Error::InvalidInput(format!(
                    "stacked part at offset {} with {} rows overflows column of length {len}",
                    part.offset,
                    r * c
                )));
            }
        }
        Ok(LinearMap {
            kind: MapKind::Stacked(parts),
            input_shape,
            output_shape: (len, 1),
        })
    }

    pub fn negated(inner: LinearMap) -> Self {
        LinearMap {
            input_shape: inner.input_shape,
            output_shape: inner.output_shape,
            kind: MapKind::Negated(Box::new(inner)),
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn input_shape(&self) -> (usize, usize) {
        self.input_shape
    }

    pub fn output_shape(&self) -> (usize, usize) {
        self.output_shape
    }

    /// True when the map sends everything to zero.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            MapKind::Dense(m) | MapKind::LeftMultiply(m) | MapKind::RightMultiply(m) => {
                m.iter().all(|v| *v == 0.0)
            }
            MapKind::Identity { scale } => *scale == 0.0,
            MapKind::Mask { indices } => indices.is_empty(),
            MapKind::Stacked(parts) => parts.iter().all(|p| p.map.is_zero()),
            MapKind::Negated(inner) => inner.is_zero(),
        }
    }

    pub fn apply(&self, x: &Block) -> Result<Block> {
        check_shape("LinearMap::apply", self.input_shape, x.shape())?;
        Ok(Block::wrap(self.apply_raw(x.as_matrix())))
    }

    pub fn adjoint(&self, y: &Block) -> Result<Block> {
        check_shape("LinearMap::adjoint", self.output_shape, y.shape())?;
        Ok(Block::wrap(self.adjoint_raw(y.as_matrix())))
    }

    /// Operator norm with the default power-iteration settings.
    pub fn norm(&self) -> f64 {
        op_norm(self, NORM_TOL, NORM_MAX_ITER).value
    }

    pub(crate) fn apply_raw(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.kind {
            MapKind::Dense(m) | MapKind::LeftMultiply(m) => m * x,
            MapKind::RightMultiply(m) => x * m,
            MapKind::Identity { scale } => {
                if *scale == 1.0 {
                    x.clone()
                } else {
                    x * *scale
                }
            }
            MapKind::Mask { indices } => {
                DMatrix::from_iterator(indices.len(), 1, indices.iter().map(|&(i, j)| x[(i, j)]))
            }
            MapKind::Stacked(parts) => {
                let mut out = DMatrix::zeros(self.output_shape.0, 1);
                for part in parts {
                    let y = part.map.apply_raw(x);
                    let seg = &mut out.as_mut_slice()[part.offset..part.offset + y.len()];
                    for (dst, src) in seg.iter_mut().zip(y.as_slice()) {
                        *dst += *src;
                    }
                }
                out
            }
            MapKind::Negated(inner) => -inner.apply_raw(x),
        }
    }

    pub(crate) fn adjoint_raw(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.kind {
            MapKind::Dense(m) | MapKind::LeftMultiply(m) => m.tr_mul(y),
            MapKind::RightMultiply(m) => y * m.transpose(),
            MapKind::Identity { scale } => {
                if *scale == 1.0 {
                    y.clone()
                } else {
                    y * *scale
                }
            }
            MapKind::Mask { indices } => {
                let mut out = DMatrix::zeros(self.input_shape.0, self.input_shape.1);
                for (k, &(i, j)) in indices.iter().enumerate() {
                    out[(i, j)] = y[(k, 0)];
                }
                out
            }
            MapKind::Stacked(parts) => {
                let mut out = DMatrix::zeros(self.input_shape.0, self.input_shape.1);
                for part in parts {
                    let (r, c) = part.map.output_shape;
                    let seg = &y.as_slice()[part.offset..part.offset + r * c];
                    let piece = DMatrix::from_column_slice(r, c, seg);
                    out += part.map.adjoint_raw(&piece);
                }
                out
            }
            MapKind::Negated(inner) => -inner.adjoint_raw(y),
        }
    }
}

fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )))
    }
}

/// Largest singular value of `map`.
///
/// Identity, mask and negation are answered in closed form; everything else
/// runs power iteration on `A†A` from the normalized all-ones vector until
/// the Rayleigh quotient changes by less than `tol` (relative) or `max_iter`
/// is reached. An unconverged run still returns its best estimate.
pub fn op_norm(map: &LinearMap, tol: f64, max_iter: usize) -> NormEstimate {
    let exact = |value: f64| NormEstimate {
        value,
        converged: true,
        iterations: 0,
    };
    match &map.kind {
        MapKind::Identity { scale } => return exact(scale.abs()),
        MapKind::Mask { indices } => return exact(if indices.is_empty() { 0.0 } else { 1.0 }),
        MapKind::Negated(inner) => return op_norm(inner, tol, max_iter),
        MapKind::Stacked(parts) if parts.len() == 1 => {
            return op_norm(&parts[0].map, tol, max_iter)
        }
        _ => {}
    }
    let (r, c) = map.input_shape;
    if r * c == 0 {
        return exact(0.0);
    }
    let mut v = DMatrix::from_element(r, c, 1.0 / ((r * c) as f64).sqrt());
    let mut previous = f64::NAN;
    let mut rayleigh = 0.0;
    for iteration in 1..=max_iter {
        let av = map.apply_raw(&v);
        rayleigh = av.norm_squared();
        let ata_v = map.adjoint_raw(&av);
        let len = ata_v.norm();
        if len == 0.0 {
            return NormEstimate {
                value: 0.0,
                converged: true,
                iterations: iteration,
            };
        }
        if (rayleigh - previous).abs() <= tol * rayleigh {
            return NormEstimate {
                value: rayleigh.sqrt(),
                converged: true,
                iterations: iteration,
            };
        }
        previous = rayleigh;
        v = ata_v / len;
    }
    NormEstimate {
        value: rayleigh.sqrt(),
        converged: false,
        iterations: max_iter,
    }
}

/// Replaces every set constraint `x_i ∈ X_i` by an auxiliary block.
///
/// For the `j`-th set-constrained block `i` a new block is appended carrying
/// the indicator of `X_i` and the map `-I` into row group `j + 1`; block `i`
/// gains an identity into the same row group. Row group 0 holds the original
/// constraint, so `b̂ = (vec(b), 0, …, 0)`. Blocks without a set keep their
/// map (placed in row group 0) and get no auxiliary partner.
pub fn lift_with_sets(problem: &Problem) -> Result<Problem> {
    let constrained: Vec<usize> = problem
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.set.is_some())
        .map(|(i, _)| i)
        .collect();
    if constrained.is_empty() {
        return Err(Error::InvalidInput(
            "lifting requires at least one block with a convex set".into(),
        ));
    }
    let b_len = problem.rhs().len();
    let mut offsets = Vec::with_capacity(constrained.len());
    let mut total = b_len;
    for &i in &constrained {
        offsets.push(total);
        total += problem.blocks()[i].x0.len();
    }

    let mut rhs = DMatrix::zeros(total, 1);
    rhs.as_mut_slice()[..b_len].copy_from_slice(problem.rhs().as_slice());

    let mut blocks = Vec::with_capacity(problem.len() + constrained.len());
    for (i, spec) in problem.blocks().iter().enumerate() {
        let shape = spec.map.input_shape();
        let mut parts = vec![StackedPart {
            offset: 0,
            map: spec.map.clone(),
        }];
        if let Some(j) = constrained.iter().position(|&c| c == i) {
            parts.push(StackedPart {
                offset: offsets[j],
                map: LinearMap::identity(shape, 1.0)?,
            });
        }
        blocks.push(BlockSpec {
            name: spec.name.clone(),
            term: spec.term.clone(),
            map: LinearMap::stacked(shape, total, parts)?,
            x0: spec.x0.clone(),
            set: None,
        });
    }
    for (j, &i) in constrained.iter().enumerate() {
        let spec = &problem.blocks()[i];
        let set = spec.set.expect("filtered above");
        let shape = spec.map.input_shape();
        let minus_identity = LinearMap::negated(LinearMap::identity(shape, 1.0)?);
        blocks.push(BlockSpec {
            name: format!("{}#set", spec.name),
            term: Term::indicator(set),
            map: LinearMap::stacked(
                shape,
                total,
                vec![StackedPart {
                    offset: offsets[j],
                    map: minus_identity,
                }],
            )?,
            x0: spec.x0.clone(),
            set: None,
        });
    }
    Problem::new(blocks, Block::wrap(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ConvexSet;
    use crate::prox::{ProxTerm, Term};
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_matrix(rng: &mut ChaCha20Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn adjoint_gap(map: &LinearMap, rng: &mut ChaCha20Rng) -> f64 {
        let (ri, ci) = map.input_shape();
        let (ro, co) = map.output_shape();
        let x = Block::new(random_matrix(rng, ri, ci)).unwrap();
        let y = Block::new(random_matrix(rng, ro, co)).unwrap();
        let lhs = map.apply(&x).unwrap().dot(&y);
        let rhs = x.dot(&map.adjoint(&y).unwrap());
        (lhs - rhs).abs() / (x.norm() * y.norm() + 1.0)
    }

    #[test]
    fn identity_apply() {
        let map = LinearMap::identity((2, 1), 1.0).unwrap();
        let x = Block::vector(&[1.0, 2.0]).unwrap();
        assert_eq!(map.apply(&x).unwrap(), x);
    }

    #[test]
    fn mask_selects_and_injects() {
        let map = LinearMap::mask((2, 2), vec![(0, 0)]).unwrap();
        let x = Block::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(map.apply(&x).unwrap(), Block::vector(&[5.0]).unwrap());
        let back = map.adjoint(&Block::scalar(5.0).unwrap()).unwrap();
        assert_eq!(
            back,
            Block::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn mask_rejects_bad_indices() {
        assert!(LinearMap::mask((2, 2), vec![(2, 0)]).is_err());
        assert!(LinearMap::mask((2, 2), vec![(1, 1), (1, 1)]).is_err());
    }

    #[test]
    fn left_multiply_matches_product() {
        let x = dmatrix![1.0, 0.0; 0.0, 2.0];
        let map = LinearMap::left_multiply(x, 2).unwrap();
        let z = Block::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let expected = Block::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(map.apply(&z).unwrap(), expected);
    }

    #[test]
    fn left_multiply_adjoint_is_transpose_product() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x = random_matrix(&mut rng, 4, 4);
            let map = LinearMap::left_multiply(x.clone(), 4).unwrap();
            let y = Block::new(random_matrix(&mut rng, 4, 4)).unwrap();
            let z = Block::new(random_matrix(&mut rng, 4, 4)).unwrap();
            let adj = map.adjoint(&y).unwrap();
            let expected = x.transpose() * y.as_matrix();
            assert!((adj.as_matrix() - &expected).norm() <= 1e-12);
            let lhs = map.apply(&z).unwrap().dot(&y);
            let rhs = z.dot(&adj);
            assert!((lhs - rhs).abs() <= 1e-10 * (z.norm() * y.norm() + 1.0));
        }
    }

    #[test]
    fn scaled_identity_is_self_adjoint() {
        let map = LinearMap::identity((3, 1), -2.5).unwrap();
        let y = Block::vector(&[1.0, -1.0, 4.0]).unwrap();
        assert_eq!(map.adjoint(&y).unwrap(), y.scaled(-2.5));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let map = LinearMap::identity((3, 1), 1.0).unwrap();
        let x = Block::zeros(2, 1);
        assert!(matches!(map.apply(&x), Err(Error::Dimension { .. })));
        assert!(matches!(map.adjoint(&x), Err(Error::Dimension { .. })));
    }

    #[test]
    fn adjoint_identity_for_every_kind() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let dense = LinearMap::dense(random_matrix(&mut rng, 5, 3)).unwrap();
        let left = LinearMap::left_multiply(random_matrix(&mut rng, 4, 3), 6).unwrap();
        let right = LinearMap::right_multiply(random_matrix(&mut rng, 3, 5), 2).unwrap();
        let mask = LinearMap::mask((3, 4), vec![(0, 1), (2, 3), (1, 0)]).unwrap();
        let stacked = LinearMap::stacked(
            (4, 6),
            24 + 5,
            vec![
                StackedPart {
                    offset: 0,
                    map: LinearMap::identity((4, 6), 0.5).unwrap(),
                },
                StackedPart {
                    offset: 3,
                    map: LinearMap::left_multiply(random_matrix(&mut rng, 2, 4), 6).unwrap(),
                },
            ],
        )
        .unwrap();
        let negated = LinearMap::negated(right.clone());
        for map in [&dense, &left, &right, &mask, &stacked, &negated] {
            for _ in 0..5 {
                assert!(adjoint_gap(map, &mut rng) <= 1e-10, "{:?}", map.kind());
            }
        }
    }

    #[test]
    fn op_norm_closed_cases() {
        let id = LinearMap::identity((3, 1), 1.0).unwrap();
        assert_eq!(op_norm(&id, NORM_TOL, NORM_MAX_ITER).value, 1.0);
        let diag = LinearMap::dense(dmatrix![3.0, 0.0; 0.0, 4.0]).unwrap();
        let est = op_norm(&diag, NORM_TOL, NORM_MAX_ITER);
        assert!(est.converged);
        assert!((est.value - 4.0).abs() <= 1e-8);
        let zero = LinearMap::dense(DMatrix::zeros(2, 3)).unwrap();
        assert_eq!(zero.norm(), 0.0);
        assert!(zero.is_zero());
    }

    #[test]
    fn op_norm_matches_dense_svd() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(20, 30, |_, _| {
            rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng)
        });
        let truth = crate::spectral::spectral_norm(&m).unwrap();
        let est = op_norm(&LinearMap::dense(m).unwrap(), NORM_TOL, NORM_MAX_ITER);
        assert!(est.converged);
        assert!(
            (est.value - truth).abs() <= 1e-8 * truth,
            "{} vs {truth}",
            est.value
        );
    }

    #[test]
    fn op_norm_flags_non_convergence() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 10, 10);
        let est = op_norm(&LinearMap::dense(m).unwrap(), 1e-15, 2);
        assert!(!est.converged);
        assert_eq!(est.iterations, 2);
        assert!(est.value > 0.0);
    }

    #[test]
    fn stacked_norm_bounded_by_components() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let a = LinearMap::dense(random_matrix(&mut rng, 4, 3)).unwrap();
        let b = LinearMap::dense(random_matrix(&mut rng, 2, 3)).unwrap();
        let bound = (a.norm().powi(2) + b.norm().powi(2)).sqrt();
        let stacked = LinearMap::stacked(
            (3, 1),
            6,
            vec![
                StackedPart { offset: 0, map: a },
                StackedPart { offset: 4, map: b },
            ],
        )
        .unwrap();
        assert!(stacked.norm() <= bound * (1.0 + 1e-9));

        // Orthogonal placement of an identity and a scaled identity is tight.
        let tight = LinearMap::stacked(
            (3, 1),
            6,
            vec![
                StackedPart {
                    offset: 0,
                    map: LinearMap::identity((3, 1), 1.0).unwrap(),
                },
                StackedPart {
                    offset: 3,
                    map: LinearMap::identity((3, 1), 2.0).unwrap(),
                },
            ],
        )
        .unwrap();
        assert!((tight.norm() - 5.0_f64.sqrt()).abs() <= 1e-9);
    }

    fn nonneg_problem() -> Problem {
        let spec = BlockSpec {
            name: "x".into(),
            term: Term::Prox(ProxTerm::Zero),
            map: LinearMap::identity((2, 1), 1.0).unwrap(),
            x0: Block::zeros(2, 1),
            set: Some(ConvexSet::Nonnegative),
        };
        Problem::new(vec![spec], Block::vector(&[1.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn lifting_single_block() {
        let lifted = lift_with_sets(&nonneg_problem()).unwrap();
        assert_eq!(lifted.len(), 2);
        assert_eq!(lifted.rhs(), &Block::vector(&[1.0, 1.0, 0.0, 0.0]).unwrap());
        assert_eq!(lifted.blocks()[1].map.norm(), 1.0);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for spec in lifted.blocks() {
            for _ in 0..5 {
                assert!(adjoint_gap(&spec.map, &mut rng) <= 1e-10);
            }
        }
    }

    #[test]
    fn lifting_adjoint_matches_row_formula() {
        let lifted = lift_with_sets(&nonneg_problem()).unwrap();
        let y = Block::vector(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        // Â_1†(y) = A_1†(y_1) + y_2 and Â_2†(y) = -y_2.
        assert_eq!(
            lifted.blocks()[0].map.adjoint(&y).unwrap(),
            Block::vector(&[4.0, 6.0]).unwrap()
        );
        assert_eq!(
            lifted.blocks()[1].map.adjoint(&y).unwrap(),
            Block::vector(&[-3.0, -4.0]).unwrap()
        );
    }

    #[test]
    fn lifting_preserves_feasibility() {
        let spec = BlockSpec {
            name: "x".into(),
            term: Term::Prox(ProxTerm::Zero),
            map: LinearMap::dense(dmatrix![1.0, 1.0]).unwrap(),
            x0: Block::zeros(2, 1),
            set: Some(ConvexSet::Nonnegative),
        };
        let problem = Problem::new(vec![spec], Block::scalar(1.0).unwrap()).unwrap();
        let lifted = lift_with_sets(&problem).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let mut seen = [0usize; 2];
        for trial in 0..200 {
            let t: f64 = rng.random_range(-0.5..1.5);
            let shift = if trial % 3 == 0 {
                rng.random_range(0.1..1.0)
            } else {
                0.0
            };
            let x = Block::vector(&[t, 1.0 - t + shift]).unwrap();
            let in_set = x.as_slice().iter().all(|v| *v >= 0.0);
            let original_ok =
                problem.residual(std::slice::from_ref(&x)).unwrap().norm() <= 1e-12 && in_set;
            // (x, x): the auxiliary copy carries the set membership.
            let lifted_ok =
                lifted.residual(&[x.clone(), x.clone()]).unwrap().norm() <= 1e-12 && in_set;
            assert_eq!(original_ok, lifted_ok);
            seen[original_ok as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }

    #[test]
    fn lifting_needs_a_set() {
        let spec = BlockSpec {
            name: "x".into(),
            term: Term::Prox(ProxTerm::Zero),
            map: LinearMap::identity((1, 1), 1.0).unwrap(),
            x0: Block::zeros(1, 1),
            set: None,
        };
        let p = Problem::new(vec![spec], Block::scalar(1.0).unwrap()).unwrap();
        assert!(matches!(lift_with_sets(&p), Err(Error::InvalidInput(_))));
    }
}
