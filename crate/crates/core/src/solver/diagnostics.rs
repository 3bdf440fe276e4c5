//! Convergence diagnostics measured against a reference KKT point.

use crate::block::Block;
use crate::error::{Error, Result};
use crate::problem::Problem;

use super::report::Snapshot;

/// `γ_k = β_k⁻¹ / Σ_j β_j⁻¹`.
pub fn ergodic_weights(betas: &[f64]) -> Result<Vec<f64>> {
    if betas.is_empty() {
        return Err(Error::InvalidInput(
            "ergodic average of an empty trace".into(),
        ));
    }
    if let Some(bad) = betas.iter().find(|b| !(**b > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "penalties must be positive, got {bad}"
        )));
    }
    let total: f64 = betas.iter().map(|b| 1.0 / b).sum();
    Ok(betas.iter().map(|b| (1.0 / b) / total).collect())
}

/// `x̄^K = Σ_{k=0}^K γ_k x^{k+1}` where `iterates[k]` is `x^{k+1}` and
/// `betas[k]` is `β_k`.
pub fn ergodic_average(iterates: &[Vec<Block>], betas: &[f64]) -> Result<Vec<Block>> {
    if iterates.len() != betas.len() {
        return Err(Error::Dimension {
            context: "ergodic average",
            expected: (betas.len(), 1),
            found: (iterates.len(), 1),
        });
    }
    let weights = ergodic_weights(betas)?;
    let mut avg: Vec<Block> = iterates[0].iter().map(|b| b.scaled(weights[0])).collect();
    for (xs, w) in iterates.iter().zip(&weights).skip(1) {
        if xs.len() != avg.len() {
            return Err(Error::Dimension {
                context: "ergodic average blocks",
                expected: (avg.len(), 1),
                found: (xs.len(), 1),
            });
        }
        for (a, x) in avg.iter_mut().zip(xs) {
            *a = a.add(&x.scaled(*w));
        }
    }
    Ok(avg)
}

/// `α = 1 / ((n+1)·max(1, max_i ‖A_i‖²/(η_i − n‖A_i‖²)))`. Requires
/// `η_i > n‖A_i‖²`.
pub fn measure_alpha(norms: &[f64], eta: &[f64]) -> Result<f64> {
    let n = norms.len() as f64;
    let mut worst = 1.0_f64;
    for (a, e) in norms.iter().zip(eta) {
        let gap = e - n * a * a;
        if !(gap > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta {e} does not exceed n·‖A‖² = {}",
                n * a * a
            )));
        }
        worst = worst.max(a * a / gap);
    }
    Ok(1.0 / ((n + 1.0) * worst))
}

/// `f(x̃) − f(x*) + Σ⟨A_i†(λ*), x̃_i − x_i*⟩ + α‖Σ A_i(x̃_i) − b‖²`.
/// Nonnegative, and zero exactly at optimal points.
pub fn optimality_measure(
    x_tilde: &[Block],
    x_star: &[Block],
    lambda_star: &Block,
    problem: &Problem,
    alpha: f64,
) -> Result<f64> {
    let gap = problem.objective(x_tilde)? - problem.objective(x_star)?;
    let mut cross = 0.0;
    for ((spec, xt), xs) in problem.blocks().iter().zip(x_tilde).zip(x_star) {
        cross += spec.map.adjoint(lambda_star)?.dot(&xt.sub(xs));
    }
    let feas = problem.residual(x_tilde)?.norm_squared();
    Ok(gap + cross + alpha * feas)
}

/// `Σ η_i‖x_i − x_i*‖² + β⁻²‖λ − λ*‖²`.
pub(crate) fn fejer_value(
    x: &[Block],
    lambda: &Block,
    beta: f64,
    x_star: &[Block],
    lambda_star: &Block,
    eta: &[f64],
) -> f64 {
    let primal: f64 = x
        .iter()
        .zip(x_star)
        .zip(eta)
        .map(|((x, xs), e)| e * x.distance(xs).powi(2))
        .sum();
    primal + lambda.distance(lambda_star).powi(2) / (beta * beta)
}

/// `Σ η_i‖x_i^k − x_i*‖² + β_k⁻²‖λ^k − λ*‖²` for every snapshot.
pub fn fejer_diagnostic(
    snapshots: &[Snapshot],
    x_star: &[Block],
    lambda_star: &Block,
    eta: &[f64],
) -> Result<Vec<f64>> {
    snapshots
        .iter()
        .map(|s| {
            if s.x.len() != x_star.len() || eta.len() != x_star.len() {
                return Err(Error::Dimension {
                    context: "fejer diagnostic",
                    expected: (x_star.len(), 1),
                    found: (s.x.len(), eta.len()),
                });
            }
            Ok(fejer_value(
                &s.x,
                &s.lambda,
                s.beta,
                x_star,
                lambda_star,
                eta,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::LinearMap;
    use crate::problem::BlockSpec;
    use crate::prox::{SmoothTerm, Term};

    fn b(v: f64) -> Block {
        Block::scalar(v).unwrap()
    }

    #[test]
    fn constant_beta_gives_mean() {
        let iterates = vec![vec![b(1.0)], vec![b(2.0)], vec![b(6.0)]];
        let avg = ergodic_average(&iterates, &[0.5, 0.5, 0.5]).unwrap();
        assert!((avg[0].as_slice()[0] - 3.0).abs() < 1e-15);
        let single = ergodic_average(&iterates[..1], &[7.0]).unwrap();
        assert_eq!(single[0], b(1.0));
        assert!(ergodic_average(&[], &[]).is_err());
    }

    #[test]
    fn weights_sum_to_one() {
        let w = ergodic_weights(&[1.0, 10.0, 100.0]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w[0] - 1.0 / 1.11).abs() < 1e-14);
    }

    fn split_problem() -> Problem {
        let q = Term::Smooth(SmoothTerm::Quadratic {
            weight: 1.0,
            center: b(1.0),
        });
        let blocks = (0..2)
            .map(|i| {
                BlockSpec::new(
                    format!("x{i}"),
                    q.clone(),
                    LinearMap::identity((1, 1), 1.0).unwrap(),
                )
            })
            .collect();
        Problem::new(blocks, b(1.0)).unwrap()
    }

    #[test]
    fn measure_examples() {
        let p = split_problem();
        let xs = [b(0.5), b(0.5)];
        let ls = b(0.5);
        assert_eq!(optimality_measure(&xs, &xs, &ls, &p, 0.1).unwrap(), 0.0);
        // feasible but worse: cross term vanishes
        let xt = [b(0.8), b(0.2)];
        let m = optimality_measure(&xt, &xs, &ls, &p, 0.1).unwrap();
        let gap = p.objective(&xt).unwrap() - p.objective(&xs).unwrap();
        assert!((m - gap).abs() < 1e-15 && m > 0.0);
    }

    #[test]
    fn alpha_formula() {
        // n = 2, ‖A‖ = 1, η = 3: max(1, 1/(3 − 2)) = 1, α = 1/3
        assert!((measure_alpha(&[1.0, 1.0], &[3.0, 3.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // η = 2.5: 1/0.5 = 2, α = 1/6
        assert!((measure_alpha(&[1.0, 1.0], &[2.5, 3.0]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(measure_alpha(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn fejer_single_snapshot() {
        let snap = Snapshot {
            x: vec![b(1.0)],
            lambda: b(2.0),
            beta: 2.0,
        };
        let q = fejer_diagnostic(&[snap], &[b(0.0)], &b(0.0), &[3.0]).unwrap();
        assert_eq!(q, vec![3.0 + 1.0]);
    }
}
