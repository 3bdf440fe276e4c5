mod common;

use common::{random_qp, scalar_qp};
use ladmpsap::oracle::eq_qp_solve;
use ladmpsap::solver::{
    check_stopping, compute_lambda_hat, ergodic_average, fejer_diagnostic, update_beta,
    update_blocks_parallel, update_lambda, BetaMax, ResidualRule, SolverState, StepSizes,
};
use ladmpsap::{
    solve, solve_naive_ladm, Block, BlockSpec, LinearMap, Problem, SolverConfig, Status, Variant,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn qp(seed: u64, n: usize) -> Problem {
    random_qp(&mut ChaCha20Rng::seed_from_u64(seed), n, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn penalty_is_monotone_and_capped(seed in 0..1000_u64, n in 2..5_usize, cap in 1.0..1e3_f64) {
        let problem = qp(seed, n);
        let mut cfg = SolverConfig::new(Variant::Ladmpsap)
            .with_tolerances(1e-9, 1e-3)
            .with_beta0(0.01)
            .with_max_iter(300)
            .with_diagnostics(false);
        cfg.schedule.beta_max = BetaMax::Bounded(cap);
        let r = solve(&problem, &cfg).unwrap();
        let betas: Vec<f64> = r.trace.iter().map(|t| t.beta).collect();
        prop_assert!(betas.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(betas.iter().chain([&r.beta]).all(|b| *b <= cap));
    }

    #[test]
    fn solves_are_deterministic(seed in 0..1000_u64, n in 2..5_usize) {
        let problem = qp(seed, n);
        let cfg = SolverConfig::new(Variant::Ladmpsap).with_tolerances(1e-6, 1e-6).with_max_iter(400).with_diagnostics(false);
        prop_assert_eq!(solve(&problem, &cfg).unwrap(), solve(&problem, &cfg).unwrap());
    }

    #[test]
    fn converged_runs_meet_their_tolerances(seed in 0..1000_u64, n in 2..5_usize) {
        let problem = qp(seed, n);
        let cfg = SolverConfig::new(Variant::Ladmpsap).with_tolerances(1e-6, 1e-5).with_beta0(1.0).with_max_iter(200_000);
        let r = solve(&problem, &cfg).unwrap();
        prop_assert_eq!(r.status, Status::Converged);
        prop_assert!(r.feasibility < 1e-6 && r.update_residual < 1e-5);
        prop_assert!((problem.relative_feasibility(&r.x).unwrap() - r.feasibility).abs() <= 1e-15);
    }

    #[test]
    fn block_order_does_not_matter(seed in 0..1000_u64, n in 2..5_usize, shift in 1..4_usize) {
        let problem = qp(seed, n);
        let k = shift % n;
        let mut blocks = problem.blocks().to_vec();
        blocks.rotate_left(k);
        let rotated = Problem::new(blocks, problem.rhs().clone()).unwrap();
        let cfg = SolverConfig::new(Variant::Ladmpsap).with_tolerances(1e-8, 1e-8).with_beta0(1.0).with_max_iter(200_000);
        let a = solve(&problem, &cfg).unwrap();
        let b = solve(&rotated, &cfg).unwrap();
        let mut bx = b.x.clone();
        bx.rotate_right(k);
        for (u, v) in a.x.iter().zip(&bx) {
            prop_assert!(u.distance(v) <= 1e-6 * (1.0 + u.norm()));
        }
    }
}

#[test]
fn naive_with_one_block_is_ladmpsap() {
    let problem = Problem::new(
        vec![BlockSpec::new(
            "x",
            ladmpsap::Term::Prox(ladmpsap::ProxTerm::L1 { weight: 1.0 }),
            LinearMap::dense(DMatrix::from_row_slice(
                2,
                3,
                &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0],
            ))
            .unwrap(),
        )],
        Block::vector(&[1.0, 2.0]).unwrap(),
    )
    .unwrap();
    let cfg = SolverConfig::new(Variant::Ladmpsap)
        .with_tolerances(1e-6, 1e-6)
        .with_max_iter(500);
    let a = solve(&problem, &cfg).unwrap();
    let b = solve_naive_ladm(&problem, &cfg).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.lambda, b.lambda);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn naive_two_block_step_is_sequential() {
    let problem = qp(3, 2);
    let eta = vec![5.0, 7.0];
    let beta = 0.5;
    let mut cfg = SolverConfig::new(Variant::NaiveLadm)
        .with_eta(eta.clone())
        .with_beta0(beta)
        .with_max_iter(1);
    cfg.enforce_eta_bounds = false;
    let r = solve(&problem, &cfg).unwrap();

    // x1 sees the old x2; x2 sees the new x1
    let blocks = problem.blocks();
    let b = problem.rhs();
    let x = problem.initial_point();
    let lambda = Block::zeros(b.shape().0, b.shape().1);
    let step = |i: usize, others: &[Block]| {
        let residual = problem.residual(others).unwrap();
        let lt = lambda.add(&residual.scaled(beta));
        let tau = beta * eta[i];
        let w = others[i].sub(&blocks[i].map.adjoint(&lt).unwrap().scaled(1.0 / tau));
        blocks[i].term.prox(&w, tau).unwrap()
    };
    let x1 = step(0, &x);
    let x2 = step(1, &[x1.clone(), x[1].clone()]);
    assert!(r.x[0].distance(&x1) < 1e-14);
    assert!(r.x[1].distance(&x2) < 1e-14);
    let lam = lambda.add(&problem.residual(&[x1, x2]).unwrap().scaled(beta));
    assert!(r.lambda.distance(&lam) < 1e-14);
}

#[test]
fn three_block_qp_reaches_closed_form() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for _ in 0..5 {
        let problem = random_qp(&mut rng, 3, 4);
        let exact = eq_qp_solve(&problem).unwrap();
        let cfg = SolverConfig::new(Variant::Ladmpsap)
            .with_tolerances(1e-10, 1e-10)
            .with_beta0(1.0)
            .with_max_iter(200_000);
        let r = solve(&problem, &cfg).unwrap();
        assert_eq!(r.status, Status::Converged);
        for (u, v) in r.x.iter().zip(&exact.x_star) {
            assert!(u.distance(v) <= 1e-5, "{}", u.distance(v));
        }
        assert!(r.lambda.distance(&exact.lambda_star) <= 1e-4 * exact.lambda_star.norm().max(1.0));
    }
}

#[test]
fn online_fejer_matches_snapshots() {
    let problem = qp(5, 3);
    let exact = eq_qp_solve(&problem).unwrap();
    let mut cfg = SolverConfig::new(Variant::Ladmpsap)
        .with_tolerances(1e-8, 1e-8)
        .with_max_iter(300)
        .with_diagnostics(true);
    cfg.fejer_reference = Some((exact.x_star.clone(), exact.lambda_star.clone()));
    let r = solve(&problem, &cfg).unwrap();
    let q = fejer_diagnostic(
        &r.snapshots,
        &exact.x_star,
        &exact.lambda_star,
        &r.parameters.eta,
    )
    .unwrap();
    assert_eq!(q.len(), r.iterations + 1);
    assert_eq!(r.fejer, q);
}

#[test]
fn reported_ergodic_average_matches_snapshots() {
    let problem = qp(9, 4);
    let cfg = SolverConfig::new(Variant::Ladmpsap)
        .with_tolerances(1e-7, 1e-7)
        .with_max_iter(200)
        .with_diagnostics(true);
    let r = solve(&problem, &cfg).unwrap();
    let iterates: Vec<Vec<Block>> = r.snapshots[1..].iter().map(|s| s.x.clone()).collect();
    let betas: Vec<f64> = r.trace.iter().map(|t| t.beta).collect();
    let avg = ergodic_average(&iterates, &betas).unwrap();
    for (u, v) in r.ergodic.as_ref().unwrap().iter().zip(&avg) {
        assert!(u.distance(v) <= 1e-12 * (1.0 + v.norm()));
    }
}

#[test]
fn exposed_steps_reproduce_the_solver() {
    let problem = scalar_qp(&mut ChaCha20Rng::seed_from_u64(2), 4);
    let cfg = SolverConfig::new(Variant::Ladmpsap)
        .with_tolerances(1e-9, 1e-6)
        .with_beta0(0.1)
        .with_max_iter(40);
    let r = solve(&problem, &cfg).unwrap();
    let steps = StepSizes::exact(r.parameters.eta.clone());
    let mut state = SolverState::initial(&problem, 0.1);
    for _ in 0..r.iterations {
        let lambda_hat = compute_lambda_hat(&state, &problem).unwrap();
        let new_x = update_blocks_parallel(&state, &problem, &lambda_hat, &steps).unwrap();
        let check = check_stopping(
            &state,
            &new_x,
            &problem,
            &steps,
            &ResidualRule::Step,
            cfg.eps1,
            cfg.schedule.eps2,
        )
        .unwrap();
        let lambda = update_lambda(&state, &problem, &new_x).unwrap();
        let beta = update_beta(state.beta, &cfg.schedule, check.residuals.update);
        state = SolverState {
            x: new_x,
            lambda,
            beta,
            iter: state.iter + 1,
        };
    }
    for (u, v) in state.x.iter().zip(&r.x) {
        assert!(u.distance(v) <= 1e-12);
    }
    assert!(state.lambda.distance(&r.lambda) <= 1e-12);
    assert_eq!(state.beta, r.beta);
}
