mod common;

use common::{random_qp, scalar_qp};
use ladmpsap::oracle::{eq_qp_solve, long_run_reference, quadratic_stationarity, ReferenceSource};
use ladmpsap::problems::build_parallel_bp;
use ladmpsap::{SolverConfig, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn closed_form_satisfies_kkt() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for _ in 0..30 {
        let problem = random_qp(&mut rng, 3, 4);
        let r = eq_qp_solve(&problem).unwrap();
        assert_eq!(r.source, ReferenceSource::ClosedForm);
        assert!(r.feasibility <= 1e-10, "{}", r.feasibility);
        let stationarity = quadratic_stationarity(&problem, &r.x_star, &r.lambda_star).unwrap();
        assert!(stationarity <= 1e-10, "{stationarity}");
    }
}

#[test]
fn long_run_agrees_with_closed_form() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for n in [2, 3, 4] {
        let problem = scalar_qp(&mut rng, n);
        let exact = eq_qp_solve(&problem).unwrap();
        let cfg = SolverConfig::new(Variant::Ladmpsap).with_beta0(1.0);
        let long = long_run_reference(&problem, &cfg).unwrap();
        assert_eq!(long.source, ReferenceSource::LongRun);
        for (u, v) in long.x_star.iter().zip(&exact.x_star) {
            assert!(u.distance(v) <= 1e-5, "n = {n}: {}", u.distance(v));
        }
    }
}

#[test]
fn long_run_is_deterministic() {
    let problem = build_parallel_bp(3, 12, 6, 1).unwrap();
    let cfg = SolverConfig::new(Variant::Ladmpsap);
    let a = long_run_reference(&problem, &cfg).unwrap();
    let b = long_run_reference(&problem, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn long_run_on_basis_pursuit_is_feasible() {
    // the caller's ε₂ still decides when the penalty grows
    let cfg = SolverConfig::new(Variant::Ladmpsap).with_tolerances(1e-3, 1e-3);
    for seed in 0..3 {
        let problem = build_parallel_bp(5, 40, 20, seed).unwrap();
        let r = long_run_reference(&problem, &cfg).unwrap();
        assert!(r.feasibility < 1e-6, "seed {seed}: {}", r.feasibility);
        assert!((problem.relative_feasibility(&r.x_star).unwrap() - r.feasibility).abs() < 1e-15);
    }
}
