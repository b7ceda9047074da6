use rayon::prelude::*;
use serde::Serialize;

use super::chain::{path_rng, run_path, simulate};
use super::{ExitKind, ExitRecord, JumpChainConfig, SimulationError, StopRule};
use crate::geometry::{Point, Region};
use crate::operator::ScalarField;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_paths: usize,
}

impl EstimateWithCI {
    /// Normal-approximation interval from the sample variance.
    pub fn from_samples(xs: &[f64]) -> EstimateWithCI {
        let n = xs.len();
        assert!(n > 0, "no samples");
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        EstimateWithCI { mean, half_width_95: Z95 * (var / n as f64).sqrt(), n_paths: n }
    }

    /// Binomial proportion `hits / n`.
    pub fn proportion(hits: usize, n: usize) -> EstimateWithCI {
        assert!(n > 0, "no samples");
        let p = hits as f64 / n as f64;
        EstimateWithCI { mean: p, half_width_95: Z95 * (p * (1.0 - p) / n as f64).sqrt(), n_paths: n }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width_95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width_95
    }

    /// `|a - b| <= k·(hw_a + hw_b)`.
    pub fn agrees_with(&self, other: &EstimateWithCI, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * (self.half_width_95 + other.half_width_95)
    }
}

/// Which exit records count as the event.
#[derive(Debug, Clone)]
pub struct ExitEvent {
    pub region: Region,
    /// Count boundary absorptions as well.
    pub include_absorbed: bool,
}

impl ExitEvent {
    pub fn new(region: Region) -> Self {
        ExitEvent { region, include_absorbed: false }
    }

    pub fn matches(&self, rec: &ExitRecord) -> bool {
        match rec.classification {
            ExitKind::AbsorbedAtBoundary => self.include_absorbed,
            ExitKind::JumpedToTarget | ExitKind::LeftRegion => self.region.contains(&rec.exit_position),
            ExitKind::BudgetExhausted | ExitKind::HorizonReached => false,
        }
    }
}

/// Paths `0..n_paths`, in index order.
pub fn exit_records(
    start: &Point,
    cfg: &JumpChainConfig,
    stop: &StopRule,
    n_paths: usize,
) -> Result<Vec<ExitRecord>, SimulationError> {
    (0..n_paths as u64).into_par_iter().map(|i| run_path(start, cfg, stop, i)).collect()
}

pub fn exit_probability(
    start: &Point,
    cfg: &JumpChainConfig,
    stop: &StopRule,
    event: &ExitEvent,
    n_paths: usize,
) -> Result<EstimateWithCI, SimulationError> {
    let hits = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| run_path(start, cfg, stop, i).map(|r| event.matches(&r) as usize))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(EstimateWithCI::proportion(hits, n_paths))
}

pub fn mean_exit_time(
    start: &Point,
    cfg: &JumpChainConfig,
    stop: &StopRule,
    n_paths: usize,
) -> Result<EstimateWithCI, SimulationError> {
    let times: Vec<f64> = exit_records(start, cfg, stop, n_paths)?.iter().map(|r| r.process_time).collect();
    Ok(EstimateWithCI::from_samples(&times))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynkinResult {
    /// `E f(X_{t∧τ})`
    pub lhs: EstimateWithCI,
    /// `f(x) + E ∫₀^{t∧τ} Lf(X_s) ds`
    pub rhs: EstimateWithCI,
    pub discrepancy: f64,
    /// Half-width of the per-path difference `f(X) - ∫Lf`.
    pub discrepancy_half_width: f64,
}

impl DynkinResult {
    /// `|lhs - rhs| / |lhs - f(x)|`: error relative to the expected change.
    pub fn relative_to_increment(&self, f_start: f64) -> f64 {
        self.discrepancy / (self.lhs.mean - f_start).abs()
    }
}

/// Compares both sides of Dynkin's formula for `f` with generator values
/// `generator(x) ≈ L f(x)` (rectangle rule over holding intervals). The stop
/// rule should carry the time horizon.
pub fn dynkin_check(
    f: &dyn ScalarField,
    generator: &(dyn Fn(&Point) -> f64 + Sync),
    start: &Point,
    cfg: &JumpChainConfig,
    stop: &StopRule,
    n_paths: usize,
) -> Result<DynkinResult, SimulationError> {
    let f0 = f.value(start);
    let pairs: Vec<(f64, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.rng_seed, i);
            let mut integral = 0.0;
            let rec = simulate(start, cfg, stop, &mut rng, |x, dt| integral += generator(x) * dt)?;
            Ok((f.value(&rec.exit_position), integral))
        })
        .collect::<Result<_, SimulationError>>()?;
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| f0 + p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (lhs, rhs, diff) =
        (EstimateWithCI::from_samples(&lhs), EstimateWithCI::from_samples(&rhs), EstimateWithCI::from_samples(&diff));
    Ok(DynkinResult {
        lhs,
        rhs,
        discrepancy: (lhs.mean - rhs.mean).abs(),
        discrepancy_half_width: diff.half_width_95,
    })
}
