use crate::block::Block;
use crate::error::{Error, Result};

/// Which iteration to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Parallel splitting with adaptive penalty.
    Ladmpsap,
    /// Parallel splitting with β fixed at β₀.
    LadmpsFixedBeta,
    /// Gauss–Seidel multi-block generalization of two-block LADMAP.
    /// Kept only as a baseline; it may diverge.
    NaiveLadm,
    /// Lift set constraints into auxiliary blocks, then run `Ladmpsap`.
    Practical,
    /// Linearize the smooth part of each term and add a proximal term.
    Proximal,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Ladmpsap,
        Variant::LadmpsFixedBeta,
        Variant::NaiveLadm,
        Variant::Practical,
        Variant::Proximal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Ladmpsap => "ladmpsap",
            Variant::LadmpsFixedBeta => "ladmps",
            Variant::NaiveLadm => "naive-ladm",
            Variant::Practical => "practical",
            Variant::Proximal => "proximal",
        }
    }

    pub fn from_name(name: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == name)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMax {
    Bounded(f64),
    /// No cap. Convergence then relies on the terms having bounded
    /// subgradients, which the solver does not check.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySchedule {
    /// Initial penalty. `None` means `m·ε₂` with `m` the number of
    /// constraint rows.
    pub beta0: Option<f64>,
    pub beta_max: BetaMax,
    pub rho0: f64,
    pub eps2: f64,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule {
            beta0: None,
            beta_max: BetaMax::Bounded(1e10),
            rho0: 10.0,
            eps2: 1e-4,
        }
    }
}

impl PenaltySchedule {
    pub fn resolve_beta0(&self, rows: usize) -> f64 {
        self.beta0.unwrap_or(rows as f64 * self.eps2)
    }

    fn validate(&self) -> Result<()> {
        if let Some(b) = self.beta0 {
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid(format!("beta0 must be positive, got {b}")));
            }
        }
        if let BetaMax::Bounded(m) = self.beta_max {
            if !(m > 0.0) {
                return Err(invalid(format!("beta_max must be positive, got {m}")));
            }
        }
        if !(self.rho0 > 1.0 && self.rho0.is_finite()) {
            return Err(invalid(format!("rho0 must exceed 1, got {}", self.rho0)));
        }
        if !(self.eps2 > 0.0 && self.eps2 < 1.0) {
            return Err(invalid(format!(
                "eps2 must lie in (0, 1), got {}",
                self.eps2
            )));
        }
        Ok(())
    }
}

/// Per-block linearization weights.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaChoice {
    /// `margin` times the convergence bound of the selected variant.
    Auto,
    /// One value per block of the solved problem (after lifting, for the
    /// set-constrained variants: originals first, then auxiliary copies).
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub schedule: PenaltySchedule,
    /// Feasibility tolerance.
    pub eps1: f64,
    /// Update-residual tolerance for stopping. `None` uses `schedule.eps2`,
    /// which also decides when the penalty grows.
    pub stop_eps2: Option<f64>,
    pub eta: EtaChoice,
    /// Proximal constants `T_i` of the proximal variant. `None` uses the
    /// Lipschitz constants of the smooth parts.
    pub prox_t: Option<Vec<f64>>,
    pub max_iter: usize,
    pub lambda0: Option<Block>,
    pub eta_margin: f64,
    /// Reject fixed `η_i` at or below the convergence bound.
    pub enforce_eta_bounds: bool,
    /// Keep a per-iteration trace and the ergodic average.
    pub record_diagnostics: bool,
    /// Keep every `(x^k, λ^k, β_k)`. Memory grows with the iteration count.
    pub record_iterates: bool,
    /// Stop as diverged once the feasibility residual exceeds this factor
    /// times its initial value (or `max(‖b‖, 1)` if larger).
    pub divergence_factor: f64,
    /// Reference `(x*, λ*)` for the solved problem. When set, the report
    /// carries the Fejér quantity of every iterate, computed on the fly.
    pub fejer_reference: Option<(Vec<Block>, Block)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::Ladmpsap,
            schedule: PenaltySchedule::default(),
            eps1: 1e-3,
            stop_eps2: None,
            eta: EtaChoice::Auto,
            prox_t: None,
            max_iter: 1000,
            lambda0: None,
            eta_margin: 1.02,
            enforce_eta_bounds: true,
            record_diagnostics: false,
            record_iterates: false,
            divergence_factor: 1e6,
            fejer_reference: None,
        }
    }
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        SolverConfig {
            variant,
            ..SolverConfig::default()
        }
    }

    pub fn with_tolerances(mut self, eps1: f64, eps2: f64) -> Self {
        self.eps1 = eps1;
        self.schedule.eps2 = eps2;
        self
    }

    pub fn with_beta0(mut self, beta0: f64) -> Self {
        self.schedule.beta0 = Some(beta0);
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_eta(mut self, eta: Vec<f64>) -> Self {
        self.eta = EtaChoice::Fixed(eta);
        self
    }

    pub fn with_diagnostics(mut self, iterates: bool) -> Self {
        self.record_diagnostics = true;
        self.record_iterates = iterates;
        self
    }

    pub fn stopping_eps2(&self) -> f64 {
        self.stop_eps2.unwrap_or(self.schedule.eps2)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !(self.eps1 > 0.0) {
            return Err(invalid(format!("eps1 must be positive, got {}", self.eps1)));
        }
        if let Some(e) = self.stop_eps2 {
            if !(e > 0.0) {
                return Err(invalid(format!("stop_eps2 must be positive, got {e}")));
            }
        }
        if !(self.eta_margin > 1.0 && self.eta_margin.is_finite()) {
            return Err(invalid(format!(
                "eta_margin must exceed 1, got {}",
                self.eta_margin
            )));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(invalid(format!(
                "divergence_factor must exceed 1, got {}",
                self.divergence_factor
            )));
        }
        if let EtaChoice::Fixed(eta) = &self.eta {
            if let Some(bad) = eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                return Err(invalid(format!("eta values must be positive, got {bad}")));
            }
        }
        if let Some(t) = &self.prox_t {
            if let Some(bad) = t.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return Err(invalid(format!("T values must be nonnegative, got {bad}")));
            }
        }
        Ok(())
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}
