//! Experiment files. One TOML file describes one experiment: which problem
//! to build, which variants to compare and how to report them.

use std::path::{Path, PathBuf};

use ladmpsap::solver::BetaMax;
use ladmpsap::{SolverConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Latlrr,
    Nmc,
    Logistic,
    Divergence,
    Custom,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Latlrr => "latlrr",
            ExperimentKind::Nmc => "nmc",
            ExperimentKind::Logistic => "logistic",
            ExperimentKind::Divergence => "divergence",
            ExperimentKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatlrrParams {
    pub s: usize,
    pub p: usize,
    pub d: usize,
    pub r_tilde: usize,
    #[serde(default = "default_latlrr_mu")]
    pub mu: f64,
}

fn default_latlrr_mu() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmcParams {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub q: f64,
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_nmc_mu")]
    pub mu: f64,
}

fn default_nmc_mu() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticParams {
    pub t: usize,
    pub s: usize,
    pub q: usize,
    #[serde(default = "default_logistic_mu")]
    pub mu: f64,
}

fn default_logistic_mu() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceParams {
    #[serde(default = "default_blocks")]
    pub n: usize,
    #[serde(default = "default_rows")]
    pub m: usize,
    #[serde(default = "default_cols")]
    pub d: usize,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        DivergenceParams {
            n: default_blocks(),
            m: default_rows(),
            d: default_cols(),
        }
    }
}

fn default_blocks() -> usize {
    5
}

fn default_rows() -> usize {
    40
}

fn default_cols() -> usize {
    20
}

/// Objective term of a custom block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermConfig {
    Zero,
    L1 {
        weight: f64,
    },
    Nuclear {
        weight: f64,
    },
    SqFrobenius {
        mu: f64,
    },
    GroupL2 {
        weight: f64,
        group_sizes: Vec<usize>,
    },
    Quadratic {
        weight: f64,
        center: Vec<f64>,
    },
}

/// A vector block `x_i` with a dense map given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBlock {
    pub name: String,
    pub term: TermConfig,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub nonnegative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomParams {
    pub rhs: Vec<f64>,
    pub blocks: Vec<CustomBlock>,
}

/// Solver settings shared by every variant. Unset values keep the
/// experiment's defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub beta0: Option<f64>,
    /// Zero or negative means no cap.
    pub beta_max: Option<f64>,
    pub rho0: Option<f64>,
    pub eta_margin: Option<f64>,
    pub divergence_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub variants: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps1")]
    pub eps1: f64,
    #[serde(default = "default_eps2")]
    pub eps2: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub solver: SolverOverrides,
    pub latlrr: Option<LatlrrParams>,
    pub nmc: Option<NmcParams>,
    pub logistic: Option<LogisticParams>,
    pub divergence: Option<DivergenceParams>,
    pub custom: Option<CustomParams>,
}

fn default_eps1() -> f64 {
    1e-3
}

fn default_eps2() -> f64 {
    1e-4
}

fn default_max_iter() -> usize {
    5000
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.variants.is_empty() {
            return Err(CliError::Config("at least one variant is required".into()));
        }
        self.parsed_variants()?;
        if !(self.eps1 > 0.0 && self.eps2 > 0.0 && self.eps2 < 1.0) {
            return Err(CliError::Config(format!(
                "tolerances must be positive with eps2 < 1, got eps1={} eps2={}",
                self.eps1, self.eps2
            )));
        }
        if self.max_iter == 0 {
            return Err(CliError::Config("max_iter must be positive".into()));
        }
        let present = match self.experiment {
            ExperimentKind::Latlrr => self.latlrr.is_some(),
            ExperimentKind::Nmc => self.nmc.is_some(),
            ExperimentKind::Logistic => self.logistic.is_some(),
            // every field has a default
            ExperimentKind::Divergence => true,
            ExperimentKind::Custom => self.custom.is_some(),
        };
        if !present {
            return Err(CliError::Config(format!(
                "experiment '{0}' needs a [{0}] table",
                self.experiment.name()
            )));
        }
        Ok(())
    }

    pub fn parsed_variants(&self) -> Result<Vec<Variant>, CliError> {
        self.variants
            .iter()
            .map(|name| {
                Variant::from_name(name).ok_or_else(|| {
                    let known: Vec<&str> = Variant::ALL.iter().map(Variant::name).collect();
                    CliError::Config(format!(
                        "unknown variant '{name}', expected one of {}",
                        known.join(", ")
                    ))
                })
            })
            .collect()
    }

    /// Solver settings for `variant` before experiment defaults.
    pub(crate) fn solver_config(&self, variant: Variant) -> SolverConfig {
        let mut cfg = SolverConfig::new(variant)
            .with_tolerances(self.eps1, self.eps2)
            .with_max_iter(self.max_iter);
        let o = &self.solver;
        cfg.schedule.beta0 = o.beta0;
        if let Some(cap) = o.beta_max {
            cfg.schedule.beta_max = if cap > 0.0 {
                BetaMax::Bounded(cap)
            } else {
                BetaMax::Unbounded
            };
        }
        if let Some(rho) = o.rho0 {
            cfg.schedule.rho0 = rho;
        }
        if let Some(m) = o.eta_margin {
            cfg.eta_margin = m;
        }
        if let Some(f) = o.divergence_factor {
            cfg.divergence_factor = f;
        }
        cfg
    }
}
