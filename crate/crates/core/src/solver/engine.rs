use std::borrow::Cow;

use nalgebra::DMatrix;

use crate::block::Block;
use crate::error::{check_shape, Error, Result};
use crate::linops::{lift_with_sets, op_norm, NORM_MAX_ITER, NORM_TOL};
use crate::problem::Problem;

use super::config::{EtaChoice, SolverConfig, Variant};
use super::diagnostics::fejer_value;
use super::report::{ResolvedParameters, Snapshot, SolveReport, Status, TraceEntry};
use super::steps::{
    block_update, kkt_residual, lambda_step, step_residual, update_beta, ResidualRule, StepSizes,
};

/// Everything fixed before the first iteration.
struct Plan<'a> {
    solved: Cow<'a, Problem>,
    /// For each original block, the index of its auxiliary copy.
    aux_of: Vec<Option<usize>>,
    params: ResolvedParameters,
    steps: StepSizes,
    rule: ResidualRule,
}

/// Strict lower bounds on `η_i` for `variant` on `problem`, together with
/// the operator norms of the maps of the problem actually iterated on.
///
/// For the lifted problem a block touching constraint row groups `r` with
/// `n_r` participating blocks needs `η_i > Σ_r n_r ‖A_{i,r}‖²`: that is
/// `n‖A_i‖² + 2` for a set-constrained block, `2` for its auxiliary copy and
/// `n‖A_i‖²` for an unconstrained block.
pub fn eta_bounds(problem: &Problem, variant: Variant) -> Result<(Vec<f64>, Vec<f64>)> {
    let norms: Vec<f64> = problem
        .blocks()
        .iter()
        .map(|b| op_norm(&b.map, NORM_TOL, NORM_MAX_ITER).value)
        .collect();
    let n = problem.len() as f64;
    let lifts = matches!(variant, Variant::Practical)
        || (variant == Variant::Proximal && problem.has_sets());
    if !lifts {
        let factor = if variant == Variant::NaiveLadm {
            1.0
        } else {
            n
        };
        let bounds = norms.iter().map(|a| factor * a * a).collect();
        return Ok((bounds, norms));
    }
    if !problem.has_sets() {
        return Err(Error::InvalidInput(
            "the practical variant needs at least one block with a convex set".into(),
        ));
    }
    let mut bounds = Vec::new();
    let mut lifted_norms = Vec::new();
    for (spec, a) in problem.blocks().iter().zip(&norms) {
        let extra = if spec.set.is_some() { 1.0 } else { 0.0 };
        bounds.push(n * a * a + 2.0 * extra);
        // The identity lands in its own rows, so ‖Â_i‖² = ‖A_i‖² + 1.
        lifted_norms.push((a * a + extra).sqrt());
    }
    for _ in problem.blocks().iter().filter(|b| b.set.is_some()) {
        bounds.push(2.0);
        lifted_norms.push(1.0);
    }
    Ok((bounds, lifted_norms))
}

fn plan<'a>(problem: &'a Problem, config: &SolverConfig) -> Result<Plan<'a>> {
    config.validate()?;
    let variant = config.variant;
    let lifts =
        variant == Variant::Practical || (variant == Variant::Proximal && problem.has_sets());
    if !lifts && problem.has_sets() {
        return Err(Error::InvalidInput(format!(
            "variant {variant} does not handle set constraints; use practical or proximal"
        )));
    }
    let (bounds, norms) = eta_bounds(problem, variant)?;
    let (solved, aux_of) = if lifts {
        let lifted = lift_with_sets(problem)?;
        let mut next = problem.len();
        let aux_of = problem
            .blocks()
            .iter()
            .map(|b| {
                b.set.map(|_| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        (Cow::Owned(lifted), aux_of)
    } else {
        (Cow::Borrowed(problem), vec![None; problem.len()])
    };
    let n = solved.len();

    if variant != Variant::Proximal {
        if let Some(spec) = solved.blocks().iter().find(|b| !b.term.has_closed_prox()) {
            return Err(Error::Unsupported(format!(
                "block '{}' has no closed-form proximal map; use the proximal variant",
                spec.name
            )));
        }
    }

    let eta = match &config.eta {
        EtaChoice::Auto => bounds
            .iter()
            .map(|b| if *b > 0.0 { config.eta_margin * b } else { 1.0 })
            .collect::<Vec<_>>(),
        EtaChoice::Fixed(eta) => {
            if eta.len() != n {
                return Err(Error::Dimension {
                    context: "fixed eta",
                    expected: (n, 1),
                    found: (eta.len(), 1),
                });
            }
            if config.enforce_eta_bounds {
                for (i, (e, b)) in eta.iter().zip(&bounds).enumerate() {
                    if e <= b {
                        return Err(Error::InvalidParameter(format!(
                            "eta[{i}] = {e} must exceed {b} for variant {variant}"
                        )));
                    }
                }
            }
            eta.clone()
        }
    };

    let lipschitz: Vec<f64> = solved.blocks().iter().map(|b| b.term.lipschitz()).collect();
    let t = if variant == Variant::Proximal {
        match &config.prox_t {
            None => lipschitz.clone(),
            Some(t) => {
                if t.len() != n {
                    return Err(Error::Dimension {
                        context: "proximal constants",
                        expected: (n, 1),
                        found: (t.len(), 1),
                    });
                }
                if config.enforce_eta_bounds {
                    for (i, (ti, li)) in t.iter().zip(&lipschitz).enumerate() {
                        if ti < li {
                            return Err(Error::InvalidParameter(format!(
                                "T[{i}] = {ti} is below the Lipschitz constant {li}"
                            )));
                        }
                    }
                }
                t.clone()
            }
        }
    } else {
        vec![0.0; n]
    };

    let has_smooth = solved
        .blocks()
        .iter()
        .any(|b| b.term.smooth_part().is_some());
    let linearize = variant == Variant::Proximal;
    // Without smooth parts and proximal terms the proximal iteration is
    // exactly the plain one, and so are its stopping rules.
    let collapses = !has_smooth && t.iter().all(|v| *v == 0.0);
    let rule = if linearize && !collapses {
        ResidualRule::Kkt {
            norms: norms.clone(),
        }
    } else {
        ResidualRule::Step
    };

    if let Some((xs, ls)) = &config.fejer_reference {
        if xs.len() != n {
            return Err(Error::Dimension {
                context: "fejer reference blocks",
                expected: (n, 1),
                found: (xs.len(), 1),
            });
        }
        for (spec, xi) in solved.blocks().iter().zip(xs) {
            check_shape("fejer reference block", spec.map.input_shape(), xi.shape())?;
        }
        check_shape(
            "fejer reference multiplier",
            solved.rhs().shape(),
            ls.shape(),
        )?;
    }
    if let Some(l0) = &config.lambda0 {
        check_shape("initial multiplier", solved.rhs().shape(), l0.shape())?;
    }
    let beta0 = config.schedule.resolve_beta0(solved.rhs().len());
    Ok(Plan {
        params: ResolvedParameters {
            eta: eta.clone(),
            t: t.clone(),
            norms,
            eta_bounds: bounds,
            beta0,
        },
        steps: StepSizes { eta, t, linearize },
        rule,
        solved,
        aux_of,
    })
}

/// Run the variant selected in `config`.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<SolveReport> {
    let plan = plan(problem, config)?;
    Ok(run(&plan, config))
}

/// The Gauss–Seidel baseline, whatever variant `config` names.
pub fn solve_naive_ladm(problem: &Problem, config: &SolverConfig) -> Result<SolveReport> {
    let config = SolverConfig {
        variant: Variant::NaiveLadm,
        ..config.clone()
    };
    solve(problem, &config)
}

fn smooth_gradients(problem: &Problem, x: &[Block], linearize: bool) -> Result<Vec<Option<Block>>> {
    problem
        .blocks()
        .iter()
        .zip(x)
        .map(|(spec, xi)| match (linearize, spec.term.smooth_part()) {
            (true, Some(g)) => g.gradient(xi).map(Some),
            _ => Ok(None),
        })
        .collect()
}

fn run(plan: &Plan<'_>, config: &SolverConfig) -> SolveReport {
    let problem: &Problem = &plan.solved;
    let steps = &plan.steps;
    let variant = config.variant;
    let b = problem.rhs().as_matrix();
    let scale = problem.rhs_scale();
    let n = problem.len();

    let mut x = problem.initial_point();
    let mut lambda = config
        .lambda0
        .clone()
        .unwrap_or_else(|| Block::zeros(b.nrows(), b.ncols()));
    let mut beta = plan.params.beta0;
    let mut products: Vec<DMatrix<f64>> = problem
        .blocks()
        .iter()
        .zip(&x)
        .map(|(spec, xi)| spec.map.apply_raw(xi.as_matrix()))
        .collect();
    let mut residual = sum_products(&products, b);
    let guard = config.divergence_factor * residual.norm().max(scale);

    let mut feasibility = residual.norm() / scale;
    let mut update_residual = f64::INFINITY;
    let mut trace = Vec::new();
    let mut snapshots = Vec::new();
    let mut ergodic_sum: Option<Vec<DMatrix<f64>>> = None;
    let mut inverse_betas = Vec::new();
    if config.record_iterates {
        snapshots.push(Snapshot {
            x: x.clone(),
            lambda: lambda.clone(),
            beta,
        });
    }
    let fejer_at = |x: &[Block], lambda: &Block, beta: f64| {
        config
            .fejer_reference
            .as_ref()
            .map(|(xs, ls)| fejer_value(x, lambda, beta, xs, ls, &steps.eta))
    };
    let mut fejer: Vec<f64> = fejer_at(&x, &lambda, beta).into_iter().collect();

    let mut status = Status::MaxIter;
    let mut message = None;
    let mut iterations = 0;
    let mut grads = match smooth_gradients(problem, &x, steps.linearize) {
        Ok(g) => g,
        Err(e) => {
            status = Status::NumericError;
            message = Some(e.to_string());
            Vec::new()
        }
    };

    if status != Status::NumericError {
        for _ in 0..config.max_iter {
            let new_x = match variant {
                Variant::NaiveLadm => {
                    gauss_seidel_sweep(problem, steps, &x, &lambda, beta, &mut products, b)
                }
                _ => parallel_sweep(problem, steps, &x, &lambda, &residual, beta, &grads),
            };
            let new_x = match new_x {
                Ok(v) => v,
                Err(e) => {
                    status = Status::NumericError;
                    message = Some(e.to_string());
                    break;
                }
            };
            if variant != Variant::NaiveLadm {
                for (p, (spec, xi)) in products.iter_mut().zip(problem.blocks().iter().zip(&new_x))
                {
                    *p = spec.map.apply_raw(xi.as_matrix());
                }
            }
            let new_residual = sum_products(&products, b);
            let new_lambda = Block::wrap(lambda_step(&lambda, &new_residual, beta));

            let new_grads = match smooth_gradients(problem, &new_x, steps.linearize) {
                Ok(g) => g,
                Err(e) => {
                    status = Status::NumericError;
                    message = Some(e.to_string());
                    break;
                }
            };
            update_residual = match &plan.rule {
                ResidualRule::Step => step_residual(&steps.eta, beta, &x, &new_x, scale),
                ResidualRule::Kkt { norms } => {
                    let pairs: Vec<(Option<Block>, Option<Block>)> = grads
                        .iter()
                        .cloned()
                        .zip(new_grads.iter().cloned())
                        .collect();
                    kkt_residual(steps, norms, beta, &x, &new_x, &pairs, scale)
                }
            };
            let residual_norm = new_residual.norm();
            feasibility = residual_norm / scale;
            let new_beta = if variant == Variant::LadmpsFixedBeta {
                beta
            } else {
                update_beta(beta, &config.schedule, update_residual)
            };

            if config.record_diagnostics {
                trace.push(TraceEntry {
                    feasibility,
                    update_residual,
                    beta,
                    objective: problem.objective(&new_x).unwrap_or(f64::NAN),
                });
                let w = 1.0 / beta;
                inverse_betas.push(w);
                match &mut ergodic_sum {
                    None => ergodic_sum = Some(new_x.iter().map(|xi| xi.as_matrix() * w).collect()),
                    Some(sum) => {
                        for (s, xi) in sum.iter_mut().zip(&new_x) {
                            *s += xi.as_matrix() * w;
                        }
                    }
                }
            }

            x = new_x;
            lambda = new_lambda;
            beta = new_beta;
            residual = new_residual;
            grads = new_grads;
            iterations += 1;
            if config.record_iterates {
                snapshots.push(Snapshot {
                    x: x.clone(),
                    lambda: lambda.clone(),
                    beta,
                });
            }
            fejer.extend(fejer_at(&x, &lambda, beta));

            let finite = x.iter().all(Block::is_finite) && lambda.is_finite();
            if !finite || !residual_norm.is_finite() || residual_norm > guard {
                status = Status::Diverged;
                message = Some(if finite {
                    format!("feasibility residual {residual_norm:.3e} exceeded guard {guard:.3e}")
                } else {
                    "non-finite iterate".to_string()
                });
                break;
            }
            if feasibility < config.eps1 && update_residual < config.stopping_eps2() {
                status = Status::Converged;
                break;
            }
        }
    }

    let total: f64 = inverse_betas.iter().sum();
    let ergodic = ergodic_sum.map(|sum| sum.into_iter().map(|s| Block::wrap(s / total)).collect());
    let ergodic_weights = inverse_betas.iter().map(|w| w / total).collect();
    let solution = plan
        .aux_of
        .iter()
        .enumerate()
        .map(|(i, aux)| x[aux.unwrap_or(i)].clone())
        .collect();
    debug_assert_eq!(x.len(), n);

    SolveReport {
        variant,
        status,
        message,
        iterations,
        x,
        solution,
        lambda,
        beta,
        feasibility,
        update_residual,
        parameters: plan.params.clone(),
        trace,
        snapshots,
        ergodic,
        ergodic_weights,
        fejer,
    }
}

/// `Σ_j p_j − b`, summed in block order.
fn sum_products(products: &[DMatrix<f64>], b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut sum = DMatrix::zeros(b.nrows(), b.ncols());
    for p in products {
        sum += p;
    }
    sum - b
}

fn parallel_sweep(
    problem: &Problem,
    steps: &StepSizes,
    x: &[Block],
    lambda: &Block,
    residual: &DMatrix<f64>,
    beta: f64,
    grads: &[Option<Block>],
) -> Result<Vec<Block>> {
    let lambda_hat = lambda_step(lambda, residual, beta);
    problem
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let adj = spec.map.adjoint_raw(&lambda_hat);
            block_update(spec, &x[i], &adj, steps.tau(i, beta), grads[i].as_ref())
        })
        .collect()
}

/// Sequential sweep with `λ̃_i = λ + β(Σ_{j<i} A_j x_j^{k+1} + Σ_{j≥i} A_j x_j^k − b)`.
/// `products` holds the current `A_j x_j` and is updated in place.
fn gauss_seidel_sweep(
    problem: &Problem,
    steps: &StepSizes,
    x: &[Block],
    lambda: &Block,
    beta: f64,
    products: &mut [DMatrix<f64>],
    b: &DMatrix<f64>,
) -> Result<Vec<Block>> {
    let mut new_x = Vec::with_capacity(x.len());
    for (i, spec) in problem.blocks().iter().enumerate() {
        let lambda_tilde = lambda_step(lambda, &sum_products(products, b), beta);
        let adj = spec.map.adjoint_raw(&lambda_tilde);
        let xi = block_update(spec, &x[i], &adj, steps.tau(i, beta), None)?;
        products[i] = spec.map.apply_raw(xi.as_matrix());
        new_x.push(xi);
    }
    Ok(new_x)
}
