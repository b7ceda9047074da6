//! Monte Carlo for the censored process on G (jumps leaving G suppressed) and
//! the symmetric stable-like process killed on leaving D.
//!
//! The process is approximated by a chain whose jumps shorter than
//! `ε(x) = min(f·ρ(x), ε_cap)` are replaced by a Brownian motion with the same
//! covariance; longer jumps are drawn by thinning an isotropic Pareto
//! proposal. All randomness of a path comes from its own ChaCha stream, so
//! results do not depend on the worker count.

mod chain;
mod estimators;

pub use chain::{path_rng, run_path, sample_jump, PathRng};
pub use estimators::{
    dynkin_check, exit_probability, exit_records, mean_exit_time, DynkinResult, EstimateWithCI, ExitEvent,
};

use serde::Serialize;
use thiserror::Error;

use crate::catalog::normalization_constant;
use crate::geometry::{DomainGeometry, Point, Region};
use crate::kernels::Kernel;
use crate::numerics::{sphere_area, QuadratureSpec};
use crate::operator::truncated_jump_rate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Jumps are restricted to G.
    Censored,
    /// Jumps range over R^n; the path dies on leaving D.
    Killed,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("start point {0} is outside the domain")]
    StartOutsideDomain(Point),
    #[error("{rejections} consecutive rejected proposals at {at}")]
    AcceptanceFailure { at: Point, rejections: usize },
}

pub const MAX_CONSECUTIVE_REJECTIONS: usize = 10_000;

#[derive(Clone)]
pub struct JumpChainConfig {
    pub alpha: f64,
    pub kernel: Kernel,
    /// G (censored) or D (killed).
    pub domain: DomainGeometry,
    pub mode: Mode,
    pub epsilon_fraction: f64,
    pub epsilon_cap: f64,
    /// Declare a boundary hit once `ρ(x) < δ_abs`.
    pub boundary_absorb_delta: f64,
    pub max_steps: usize,
    pub rng_seed: u64,
    /// Replace the suppressed small jumps by a matched Brownian motion.
    pub small_jump_diffusion: bool,
}

impl JumpChainConfig {
    pub fn new(alpha: f64, kernel: Kernel, domain: DomainGeometry, mode: Mode) -> Self {
        JumpChainConfig {
            alpha,
            kernel,
            domain,
            mode,
            epsilon_fraction: 0.25,
            epsilon_cap: 0.25,
            boundary_absorb_delta: 1e-3,
            max_steps: 1_000_000,
            rng_seed: 0,
            small_jump_diffusion: true,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidConfig(m));
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad(format!("alpha = {} outside (0, 2)", self.alpha));
        }
        if !(self.epsilon_fraction > 0.0 && self.epsilon_fraction <= 0.5) {
            return bad(format!("epsilon_fraction = {} outside (0, 1/2]", self.epsilon_fraction));
        }
        if !(self.epsilon_cap > 0.0) || !(self.boundary_absorb_delta > 0.0) {
            return bad("epsilon_cap and boundary_absorb_delta must be positive".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if !(self.kernel.upper() > 0.0 && self.kernel.upper().is_finite()) {
            return bad(format!("kernel '{}' has no finite positive upper bound", self.kernel.name()));
        }
        Ok(())
    }

    /// `ε(x)` for a point at distance `rho` from the boundary.
    pub fn epsilon(&self, rho: f64) -> f64 {
        (self.epsilon_fraction * rho).min(self.epsilon_cap)
    }

    /// The same chain on the domain dilated by `lambda`; ε-cap and δ_abs
    /// scale along so the dilated chain is the image of this one.
    pub fn scaled(&self, lambda: f64) -> Self {
        JumpChainConfig {
            domain: self.domain.scaled(lambda),
            epsilon_cap: self.epsilon_cap * lambda,
            boundary_absorb_delta: self.boundary_absorb_delta * lambda,
            ..self.clone()
        }
    }
}

/// Run region and classification target of a path.
#[derive(Debug, Clone)]
pub struct StopRule {
    /// The path runs while it stays here (the set U of τ_U).
    pub run: Region,
    /// Exit positions in this set are classified as hits.
    pub target: Region,
    /// Stop once the process time exceeds this.
    pub horizon: Option<f64>,
}

impl StopRule {
    pub fn new(run: Region, target: Region) -> Self {
        StopRule { run, target, horizon: None }
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn scaled(&self, lambda: f64, time_factor: f64) -> Self {
        StopRule {
            run: self.run.scaled(lambda),
            target: self.target.scaled(lambda),
            horizon: self.horizon.map(|t| t * time_factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitKind {
    JumpedToTarget,
    AbsorbedAtBoundary,
    LeftRegion,
    BudgetExhausted,
    /// The time horizon of the stop rule was reached first.
    HorizonReached,
}

impl ExitKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExitKind::JumpedToTarget => "target",
            ExitKind::AbsorbedAtBoundary => "absorbed",
            ExitKind::LeftRegion => "left",
            ExitKind::BudgetExhausted => "budget",
            ExitKind::HorizonReached => "horizon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub exit_position: Point,
    pub classification: ExitKind,
    /// Accepted jumps.
    pub steps: usize,
    /// Proposals including rejected ones.
    pub proposals: usize,
    pub process_time: f64,
}

/// Dominating proposal rate `A·σ_{n-1}·C₂·ε^{-α}/α`.
pub(crate) fn proposal_rate(n: usize, alpha: f64, upper: f64, eps: f64, a_const: f64) -> f64 {
    a_const * sphere_area(n) * upper * eps.powf(-alpha) / alpha
}

/// Per-coordinate variance per unit time of the Brownian stand-in for jumps
/// shorter than ε: `A κ(x,x) σ_{n-1} ε^{2-α} / (n (2-α))`.
pub(crate) fn small_jump_variance(n: usize, alpha: f64, kxx: f64, eps: f64, a_const: f64) -> f64 {
    a_const * kxx * sphere_area(n) * eps.powf(2.0 - alpha) / (n as f64 * (2.0 - alpha))
}

/// Jump intensity `λ_ε(x) = A ∫_{target, |y-x|>ε} κ(x,y)|x-y|^{-n-α} dy`, target
/// G (censored) or R^n (killed).
pub fn jump_rate(x: &Point, cfg: &JumpChainConfig, eps: f64) -> Result<f64, SimulationError> {
    cfg.validate()?;
    let n = x.dim();
    let a = normalization_constant(n, cfg.alpha).map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
    if cfg.mode == Mode::Killed {
        if let Some(c) = cfg.kernel.constant_value() {
            return Ok(c * proposal_rate(n, cfg.alpha, 1.0, eps, a));
        }
    }
    let whole = DomainGeometry::ball(*x, 1e12);
    let target = match cfg.mode {
        Mode::Censored => &cfg.domain,
        Mode::Killed => &whole,
    };
    truncated_jump_rate(&cfg.kernel, target, x, cfg.alpha, eps, &QuadratureSpec::new(1e-12, 1e-8))
        .map(|r| r.value)
        .map_err(|e| SimulationError::InvalidConfig(e.to_string()))
}

/// Installs a global rayon pool sized by `BHI_THREADS` if set. Results never
/// depend on the pool size.
pub fn configure_threads_from_env() {
    if let Some(n) = std::env::var("BHI_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
