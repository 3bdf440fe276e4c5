//! Builds the configured problem, computes a long-run reference and runs
//! every requested variant against it.

use std::time::Instant;

use ladmpsap::oracle::long_run_reference;
use ladmpsap::problems::{
    build_group_logistic, build_latent_lrr, build_nmc, build_parallel_bp, fa_metric,
    gen_group_logistic_data, gen_latent_lrr_data, gen_nmc_data, GroupLogisticSpec, LatentLrrSpec,
    NmcSpec,
};
use ladmpsap::spectral::spectral_norm;
use ladmpsap::{
    solve, Block, BlockSpec, ConvexSet, LinearMap, Problem, ProxTerm, SmoothTerm, SolverConfig,
    Term, Variant,
};
use log::{error, info, warn};
use nalgebra::DMatrix;

use crate::config::{CustomParams, ExperimentConfig, ExperimentKind, TermConfig};
use crate::report::{round_sig, BlockError, ReferenceInfo, Report, ResultRow};
use crate::CliError;

/// A built problem with what the runner needs besides it.
pub struct Instance {
    pub problem: Problem,
    /// Ground truth for the FA column (completion only).
    pub truth: Option<Block>,
    /// Variant used for the long-run reference.
    pub reference_variant: Variant,
    /// Experiment-specific defaults applied to every solver config.
    defaults: Defaults,
}

#[derive(Default)]
struct Defaults {
    beta0: Option<f64>,
    rho0: Option<f64>,
}

pub fn build_instance(config: &ExperimentConfig) -> Result<Instance, CliError> {
    let seed = config.seed;
    let missing = |name: &str| CliError::Config(format!("missing [{name}] table"));
    let instance = match config.experiment {
        ExperimentKind::Latlrr => {
            let p = config.latlrr.as_ref().ok_or_else(|| missing("latlrr"))?;
            let spec = LatentLrrSpec {
                s: p.s,
                p: p.p,
                d: p.d,
                r_tilde: p.r_tilde,
                mu: p.mu,
                seed,
            };
            let x = gen_latent_lrr_data(&spec)?;
            let (d, n) = x.shape();
            let beta0 = spectral_norm(x.as_matrix())? * d.min(n) as f64 * config.eps2;
            Instance {
                problem: build_latent_lrr(&x, p.mu)?,
                truth: None,
                reference_variant: Variant::Ladmpsap,
                defaults: Defaults {
                    beta0: Some(beta0),
                    rho0: None,
                },
            }
        }
        ExperimentKind::Nmc => {
            let p = config.nmc.as_ref().ok_or_else(|| missing("nmc"))?;
            let spec = NmcSpec {
                m: p.m,
                n: p.n,
                rank: p.rank,
                q: p.q,
                noise: p.noise,
                mu: p.mu,
                seed,
            };
            let data = gen_nmc_data(&spec)?;
            Instance {
                problem: build_nmc(&data.b_obs, &data.omega, (p.m, p.n), p.mu)?,
                truth: Some(data.x0),
                reference_variant: Variant::Practical,
                defaults: Defaults::default(),
            }
        }
        ExperimentKind::Logistic => {
            let p = config
                .logistic
                .as_ref()
                .ok_or_else(|| missing("logistic"))?;
            let spec = GroupLogisticSpec {
                t: p.t,
                s: p.s,
                q: p.q,
                mu: p.mu,
                seed,
            };
            let data = gen_group_logistic_data(&spec)?;
            Instance {
                problem: build_group_logistic(&data.x, &data.y, &data.groups, p.mu)?,
                truth: None,
                reference_variant: Variant::Proximal,
                defaults: Defaults {
                    beta0: Some(1.0),
                    rho0: Some(5.0),
                },
            }
        }
        ExperimentKind::Divergence => {
            let p = config.divergence.clone().unwrap_or_default();
            Instance {
                problem: build_parallel_bp(p.n, p.m, p.d, seed)?,
                truth: None,
                reference_variant: Variant::Ladmpsap,
                defaults: Defaults::default(),
            }
        }
        ExperimentKind::Custom => {
            let p = config.custom.as_ref().ok_or_else(|| missing("custom"))?;
            let problem = build_custom(p)?;
            let reference_variant = if problem.has_sets() {
                Variant::Practical
            } else {
                Variant::Ladmpsap
            };
            Instance {
                problem,
                truth: None,
                reference_variant,
                defaults: Defaults::default(),
            }
        }
    };
    Ok(instance)
}

fn build_custom(params: &CustomParams) -> Result<Problem, CliError> {
    let rows = params.rhs.len();
    let blocks = params
        .blocks
        .iter()
        .map(|b| {
            if b.matrix.len() != rows {
                return Err(CliError::Config(format!(
                    "block '{}' has {} matrix rows, rhs has {rows}",
                    b.name,
                    b.matrix.len()
                )));
            }
            let cols = b.matrix.first().map_or(0, Vec::len);
            if cols == 0 || b.matrix.iter().any(|r| r.len() != cols) {
                return Err(CliError::Config(format!(
                    "block '{}' needs a non-empty rectangular matrix",
                    b.name
                )));
            }
            let a = DMatrix::from_fn(rows, cols, |i, j| b.matrix[i][j]);
            let term = match &b.term {
                TermConfig::Zero => Term::zero(),
                TermConfig::L1 { weight } => Term::Prox(ProxTerm::L1 { weight: *weight }),
                TermConfig::Nuclear { weight } => Term::Prox(ProxTerm::Nuclear { weight: *weight }),
                TermConfig::SqFrobenius { mu } => Term::Prox(ProxTerm::SqFrobenius { mu: *mu }),
                TermConfig::GroupL2 {
                    weight,
                    group_sizes,
                } => Term::Prox(ProxTerm::GroupL2 {
                    weight: *weight,
                    group_sizes: group_sizes.clone(),
                }),
                TermConfig::Quadratic { weight, center } => Term::Smooth(SmoothTerm::Quadratic {
                    weight: *weight,
                    center: Block::vector(center)?,
                }),
            };
            let spec = BlockSpec::new(b.name.clone(), term, LinearMap::dense(a)?);
            Ok(if b.nonnegative {
                spec.with_set(ConvexSet::Nonnegative)
            } else {
                spec
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Problem::new(blocks, Block::vector(&params.rhs)?)?)
}

impl Instance {
    /// Solver settings for `variant`: the config's values, then the
    /// experiment's defaults for anything the config leaves unset.
    pub fn solver_config(&self, config: &ExperimentConfig, variant: Variant) -> SolverConfig {
        let mut cfg = config.solver_config(variant);
        if cfg.schedule.beta0.is_none() {
            cfg.schedule.beta0 = self.defaults.beta0;
        }
        if config.solver.rho0.is_none() {
            if let Some(rho) = self.defaults.rho0 {
                cfg.schedule.rho0 = rho;
            }
        }
        cfg
    }
}

fn relative_error(x: &Block, reference: &Block) -> f64 {
    let scale = reference.norm();
    x.distance(reference) / if scale > 0.0 { scale } else { 1.0 }
}

/// Rows for every variant that ran, plus the variants that could not run.
pub struct ExperimentOutcome {
    pub report: Report,
    pub failures: Vec<(String, String)>,
}

impl ExperimentOutcome {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    config.validate()?;
    let variants = config.parsed_variants()?;
    let instance = build_instance(config)?;
    let problem = &instance.problem;

    let ref_cfg = instance.solver_config(config, instance.reference_variant);
    let reference = long_run_reference(problem, &ref_cfg)?;
    info!(
        "reference from {} with feasibility {:.3e}",
        instance.reference_variant, reference.feasibility
    );
    if reference.feasibility > config.eps1 {
        warn!(
            "reference feasibility {:.3e} exceeds eps1; relative errors are only indicative",
            reference.feasibility
        );
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for variant in variants {
        let cfg = instance.solver_config(config, variant);
        let start = Instant::now();
        let report = match solve(problem, &cfg) {
            Ok(r) => r,
            Err(e) => {
                error!("{variant}: {e}");
                failures.push((variant.name().to_string(), e.to_string()));
                continue;
            }
        };
        let elapsed = start.elapsed().as_secs_f64();
        if let Some(msg) = &report.message {
            warn!("{variant}: {msg}");
        }
        info!(
            "{variant}: {} after {} iterations",
            report.status, report.iterations
        );
        let rel_errors = problem
            .blocks()
            .iter()
            .zip(report.solution.iter().zip(&reference.solution))
            .map(|(spec, (x, r))| BlockError {
                block: spec.name.clone(),
                value: round_sig(relative_error(x, r)),
            })
            .collect();
        let fa = match &instance.truth {
            Some(x0) => Some(round_sig(fa_metric(&report.solution[0], x0)?)),
            None => None,
        };
        rows.push(ResultRow {
            variant: variant.name().to_string(),
            status: report.status.name().to_string(),
            iterations: report.iterations,
            time_s: round_sig(elapsed),
            rel_errors,
            fa,
        });
    }

    Ok(ExperimentOutcome {
        report: Report {
            experiment: config.experiment.name().to_string(),
            seed: config.seed,
            reference: ReferenceInfo {
                variant: instance.reference_variant.name().to_string(),
                feasibility: round_sig(reference.feasibility),
            },
            rows,
        },
        failures,
    })
}
