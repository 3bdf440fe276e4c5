use ladmpsap::linops::{StackedPart, NORM_MAX_ITER, NORM_TOL};
use ladmpsap::oracle::materialize;
use ladmpsap::{
    lift_with_sets, op_norm, Block, BlockSpec, ConvexSet, LinearMap, Problem, ProxTerm, Term,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0..2.0_f64, r * c)
        .prop_map(move |v| DMatrix::from_column_slice(r, c, &v))
}

fn block(r: usize, c: usize) -> impl Strategy<Value = Block> {
    matrix(r, c).prop_map(|m| Block::new(m).unwrap())
}

/// Maps from 3×2 blocks (6×1 for dense maps), paired with an input and an
/// output of matching shapes.
fn map_with_points() -> impl Strategy<Value = (LinearMap, Block, Block)> {
    let maps = prop_oneof![
        matrix(4, 6).prop_map(|m| LinearMap::dense(m).unwrap()),
        (-3.0..3.0_f64).prop_map(|s| LinearMap::identity((3, 2), s).unwrap()),
        Just(LinearMap::mask((3, 2), vec![(2, 1), (0, 0), (1, 1)]).unwrap()),
        matrix(5, 3).prop_map(|x| LinearMap::left_multiply(x, 2).unwrap()),
        matrix(2, 4).prop_map(|x| LinearMap::right_multiply(x, 3).unwrap()),
        matrix(3, 3).prop_map(|x| LinearMap::negated(LinearMap::left_multiply(x, 2).unwrap())),
        (matrix(2, 3), -2.0..2.0_f64).prop_map(|(x, s)| {
            let parts = vec![
                StackedPart {
                    offset: 0,
                    map: LinearMap::left_multiply(x, 2).unwrap(),
                },
                StackedPart {
                    offset: 5,
                    map: LinearMap::identity((3, 2), s).unwrap(),
                },
            ];
            LinearMap::stacked((3, 2), 12, parts).unwrap()
        }),
    ];
    maps.prop_flat_map(|map| {
        let (ir, ic) = map.input_shape();
        let (or, oc) = map.output_shape();
        (Just(map), block(ir, ic), block(or, oc))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn adjoint_identity((map, x, y) in map_with_points()) {
        let lhs = map.apply(&x).unwrap().dot(&y);
        let rhs = x.dot(&map.adjoint(&y).unwrap());
        let scale = map.apply(&x).unwrap().norm() * y.norm() + x.norm() * map.adjoint(&y).unwrap().norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn norm_bounds_every_ratio((map, x, _y) in map_with_points()) {
        let est = op_norm(&map, NORM_TOL, NORM_MAX_ITER);
        let ratio = map.apply(&x).unwrap().norm() / x.norm();
        prop_assert!(ratio <= est.value * (1.0 + 1e-6) + 1e-12);
        prop_assert!((est.value - map.norm()).abs() <= 1e-12 * est.value.max(1.0));
    }

    #[test]
    fn norm_agrees_with_materialized_matrix((map, _x, _y) in map_with_points()) {
        let dense = materialize(&map);
        let exact = dense.singular_values().max();
        let est = op_norm(&map, 1e-13, 20_000).value;
        prop_assert!((est - exact).abs() <= 1e-5 * exact.max(1.0), "{} vs {}", est, exact);
    }

    #[test]
    fn lifted_feasibility_matches_sets(
        a in matrix(3, 4),
        c in matrix(3, 2),
        x in block(4, 1),
        z in block(2, 1),
        aux in block(4, 1),
    ) {
        // x carries a set, z does not
        let blocks = vec![
            BlockSpec::new("x", Term::Prox(ProxTerm::L1 { weight: 1.0 }), LinearMap::dense(a).unwrap())
                .with_set(ConvexSet::Nonnegative),
            BlockSpec::new("z", Term::zero(), LinearMap::dense(c).unwrap()),
        ];
        let problem = Problem::new(blocks, Block::vector(&[1.0, -1.0, 0.5]).unwrap()).unwrap();
        let lifted = lift_with_sets(&problem).unwrap();
        prop_assert_eq!(lifted.len(), 3);
        let original = problem.residual(&[x.clone(), z.clone()]).unwrap();
        let with_copy = lifted.residual(&[x.clone(), z.clone(), x.clone()]).unwrap();
        // the copy rows vanish and the original rows are unchanged
        prop_assert_eq!(&with_copy.as_slice()[..3], original.as_slice());
        prop_assert!(with_copy.as_slice()[3..].iter().all(|v| *v == 0.0));
        let other = lifted.residual(&[x.clone(), z, aux.clone()]).unwrap();
        let gap = other.as_slice()[3..].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((gap - x.distance(&aux)).abs() <= 1e-12);
    }
}

#[test]
fn lifting_rejects_unconstrained_problems() {
    let p = Problem::new(
        vec![BlockSpec::new(
            "x",
            Term::zero(),
            LinearMap::identity((2, 1), 1.0).unwrap(),
        )],
        Block::zeros(2, 1),
    )
    .unwrap();
    assert!(lift_with_sets(&p).is_err());
}
