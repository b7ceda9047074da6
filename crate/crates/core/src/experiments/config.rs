use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::geometry::{BoundaryGraph, DomainGeometry, Point};
use crate::kernels::Kernel;
use crate::numerics::log_space;
use crate::simulator::{JumpChainConfig, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BhiFit,
    Harnack,
    Carleson,
    CurvedScan,
    Lipschitz,
    Dynkin,
    Scaling,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::BhiFit => "bhi-fit",
            ExperimentKind::Harnack => "harnack",
            ExperimentKind::Carleson => "carleson",
            ExperimentKind::CurvedScan => "curved-scan",
            ExperimentKind::Lipschitz => "lipschitz",
            ExperimentKind::Dynkin => "dynkin",
            ExperimentKind::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    HalfSpace,
    /// `{x_n > slope·|x̃|}`
    Wedge { slope: f64 },
    /// `{x_n > c·|x̃|^β}`
    PowerGraph { c: f64, beta: f64 },
    Ball { radius: f64 },
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> DomainGeometry {
        match *self {
            DomainSpec::HalfSpace => DomainGeometry::half_space(dim),
            DomainSpec::Wedge { slope } => DomainGeometry::wedge(dim, slope),
            DomainSpec::PowerGraph { c, beta } => DomainGeometry::graph(BoundaryGraph::power(dim, c, beta)),
            DomainSpec::Ball { radius } => DomainGeometry::ball(Point::zeros(dim), radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    Constant { value: f64 },
    HalfspaceSubordinate,
}

impl KernelSpec {
    pub fn build(&self, dim: usize, alpha: f64) -> Kernel {
        match *self {
            KernelSpec::Constant { value } => Kernel::constant(value),
            KernelSpec::HalfspaceSubordinate => Kernel::halfspace_subordinate(dim, alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Censored,
    Killed,
}

/// Heights `t₁ > … > t_m`, either listed or log-spaced over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default = "LadderSpec::default_lo")]
    pub lo: f64,
    #[serde(default = "LadderSpec::default_hi")]
    pub hi: f64,
    #[serde(default = "LadderSpec::default_per_decade")]
    pub per_decade: usize,
}

impl LadderSpec {
    fn default_lo() -> f64 {
        1e-2
    }
    fn default_hi() -> f64 {
        3e-1
    }
    fn default_per_decade() -> usize {
        8
    }

    pub fn log(lo: f64, hi: f64, per_decade: usize) -> Self {
        LadderSpec { points: None, lo, hi, per_decade }
    }

    pub fn heights(&self) -> Vec<f64> {
        if let Some(p) = &self.points {
            return p.clone();
        }
        let m = ((self.hi / self.lo).log10() * self.per_decade as f64).round() as usize + 1;
        let mut t = log_space(self.lo, self.hi, m.max(2));
        t.reverse();
        t
    }
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec::log(Self::default_lo(), Self::default_hi(), Self::default_per_decade())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub epsilon_fraction: f64,
    pub epsilon_cap: f64,
    pub boundary_absorb_delta: f64,
    pub max_steps: usize,
    pub small_jump_diffusion: bool,
}

impl Default for ChainSpec {
    fn default() -> Self {
        ChainSpec {
            epsilon_fraction: 0.25,
            epsilon_cap: 0.25,
            boundary_absorb_delta: 1e-3,
            max_steps: 1_000_000,
            small_jump_diffusion: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackSpec {
    /// Height of the upper point of every pair.
    pub base_height: f64,
    /// Radius r of the Harnack pairs; `|x₁ - x₂| < 2^k r`.
    pub radius: f64,
    pub ks: Vec<u32>,
    /// Suspect threshold relative to the first normalized ratio.
    pub factor: f64,
}

impl Default for HarnackSpec {
    fn default() -> Self {
        HarnackSpec { base_height: 0.5, radius: 0.04, ks: vec![1, 2, 3], factor: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvedRole {
    /// `h_{α-1}`: `|value| ≲ t^{β-2}` (log growth when β = 2).
    DecayBound,
    /// `h_p` with the barrier exponent: positive values, `≳ t^{p-α}`.
    Positivity,
    /// β ≤ α: the principal value must diverge to -∞.
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvedSpec {
    pub role: CurvedRole,
    /// Overrides the exponent implied by the role.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub exponent_tolerance: f64,
}

impl Default for CurvedSpec {
    fn default() -> Self {
        CurvedSpec { role: CurvedRole::DecayBound, p: None, exponent_tolerance: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynkinSpec {
    pub center: Vec<f64>,
    /// Support radius of the bump.
    pub bump_radius: f64,
    /// Radius of the ball the path is stopped on leaving.
    pub region_radius: f64,
    pub horizon: f64,
    /// Generator grid nodes per axis.
    pub grid: usize,
    /// Replaces the chain's ε cap; it must be small against the bump radius.
    pub epsilon_cap: f64,
    pub tolerance: f64,
}

impl Default for DynkinSpec {
    fn default() -> Self {
        DynkinSpec { center: vec![0.0, 1.0], bump_radius: 0.5, region_radius: 0.75, horizon: 0.05, grid: 17, epsilon_cap: 0.01, tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    pub lambda: f64,
    pub start_heights: Vec<f64>,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec { lambda: 2.0, start_heights: vec![0.05, 0.2] }
    }
}

/// One experiment. Unset sections take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    #[serde(default = "ExperimentConfig::default_dim")]
    pub dim: usize,
    pub alpha: f64,
    pub domain: DomainSpec,
    #[serde(default = "ExperimentConfig::default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default = "ExperimentConfig::default_mode")]
    pub mode: ModeSpec,
    /// Box height a and lateral radius r.
    #[serde(default = "ExperimentConfig::default_box")]
    pub box_a: f64,
    #[serde(default = "ExperimentConfig::default_box")]
    pub box_r: f64,
    #[serde(default)]
    pub ladder: LadderSpec,
    #[serde(default = "ExperimentConfig::default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub chain: ChainSpec,
    /// Allowed deviation of fitted slopes from their target.
    #[serde(default = "ExperimentConfig::default_slope_tol")]
    pub slope_tolerance: f64,
    #[serde(default = "ExperimentConfig::default_r2")]
    pub min_r_squared: f64,
    #[serde(default)]
    pub harnack: HarnackSpec,
    #[serde(default)]
    pub curved: CurvedSpec,
    #[serde(default)]
    pub dynkin: DynkinSpec,
    #[serde(default)]
    pub scaling: ScalingSpec,
    /// Bound on max/min of the Lipschitz ratio table.
    #[serde(default = "ExperimentConfig::default_ratio_bound")]
    pub ratio_bound: f64,
}

impl ExperimentConfig {
    fn default_dim() -> usize {
        2
    }
    fn default_kernel() -> KernelSpec {
        KernelSpec::Constant { value: 1.0 }
    }
    fn default_mode() -> ModeSpec {
        ModeSpec::Censored
    }
    fn default_box() -> f64 {
        1.0
    }
    fn default_paths() -> usize {
        100_000
    }
    fn default_slope_tol() -> f64 {
        0.15
    }
    fn default_r2() -> f64 {
        0.9
    }
    fn default_ratio_bound() -> f64 {
        3.0
    }

    /// A configuration with every optional section at its default.
    pub fn new(name: &str, experiment: ExperimentKind, alpha: f64, domain: DomainSpec) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            experiment,
            dim: Self::default_dim(),
            alpha,
            domain,
            kernel: Self::default_kernel(),
            mode: Self::default_mode(),
            box_a: 1.0,
            box_r: 1.0,
            ladder: LadderSpec::default(),
            n_paths: Self::default_paths(),
            seed: 0,
            output: None,
            chain: ChainSpec::default(),
            slope_tolerance: Self::default_slope_tol(),
            min_r_squared: Self::default_r2(),
            harnack: HarnackSpec::default(),
            curved: CurvedSpec::default(),
            dynkin: DynkinSpec::default(),
            scaling: ScalingSpec::default(),
            ratio_bound: Self::default_ratio_bound(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML form, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim = {} (supported: 1, 2, 3)", self.dim));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad(format!("alpha = {} outside (0, 2)", self.alpha));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be positive".into());
        }
        if !(self.box_a > 0.0 && self.box_r > 0.0) {
            return bad("box_a and box_r must be positive".into());
        }
        let t = self.ladder.heights();
        if t.iter().any(|&h| !(h > 0.0)) || t.windows(2).any(|w| w[1] >= w[0]) {
            return bad("ladder must be positive and strictly decreasing".into());
        }
        let needs_fit = matches!(self.experiment, ExperimentKind::BhiFit | ExperimentKind::CurvedScan);
        if needs_fit && t.len() < 5 {
            return bad(format!("exponent fits need at least 5 ladder points (got {})", t.len()));
        }
        if let (DomainSpec::PowerGraph { .. } | DomainSpec::Wedge { .. }, 1) = (&self.domain, self.dim) {
            return bad("graph domains need dim >= 2".into());
        }
        if self.experiment == ExperimentKind::CurvedScan && !matches!(self.domain, DomainSpec::PowerGraph { .. }) {
            return bad("curved-scan needs a power-graph domain".into());
        }
        if self.experiment == ExperimentKind::Dynkin && self.dynkin.center.len() != self.dim {
            return bad("dynkin.center has the wrong dimension".into());
        }
        self.chain_config(self.seed).validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn domain_geometry(&self) -> DomainGeometry {
        self.domain.build(self.dim)
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel.build(self.dim, self.alpha)
    }

    pub fn chain_config(&self, seed: u64) -> JumpChainConfig {
        let mode = match self.mode {
            ModeSpec::Censored => Mode::Censored,
            ModeSpec::Killed => Mode::Killed,
        };
        let mut c = JumpChainConfig::new(self.alpha, self.kernel(), self.domain_geometry(), mode);
        c.epsilon_fraction = self.chain.epsilon_fraction;
        c.epsilon_cap = self.chain.epsilon_cap;
        c.boundary_absorb_delta = self.chain.boundary_absorb_delta;
        c.max_steps = self.chain.max_steps;
        c.small_jump_diffusion = self.chain.small_jump_diffusion;
        c.rng_seed = seed;
        c
    }
}
