use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    proposal_rate, small_jump_variance, ExitKind, ExitRecord, JumpChainConfig, Mode, SimulationError, StopRule,
    MAX_CONSECUTIVE_REJECTIONS,
};
use crate::catalog::normalization_constant;
use crate::geometry::Point;

pub type PathRng = ChaCha8Rng;

/// Independent stream for path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform_direction(n: usize, rng: &mut PathRng) -> Point {
    match n {
        1 => Point::new(&[if rng.random::<bool>() { 1.0 } else { -1.0 }]),
        2 => {
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            Point::new(&[c, s])
        }
        _ => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            let r = (1.0 - z * z).max(0.0).sqrt();
            Point::new(&[r * c, r * s, z])
        }
    }
}

/// Pareto radius on `(ε, ∞)` with density `∝ r^{-1-α}`.
fn pareto_radius(eps: f64, alpha: f64, rng: &mut PathRng) -> f64 {
    eps * (1.0 - rng.random::<f64>()).powf(-1.0 / alpha)
}

struct Prepared {
    a_const: f64,
    upper: f64,
    accept_all: bool,
}

fn prepare(cfg: &JumpChainConfig, n: usize) -> Result<Prepared, SimulationError> {
    cfg.validate()?;
    let a_const = normalization_constant(n, cfg.alpha).map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
    Ok(Prepared { a_const, upper: cfg.kernel.upper(), accept_all: cfg.kernel.constant_value().is_some() })
}

fn accepts(cfg: &JumpChainConfig, pre: &Prepared, x: &Point, y: &Point, rng: &mut PathRng) -> bool {
    if cfg.mode == Mode::Censored && !cfg.domain.contains(y) {
        return false;
    }
    pre.accept_all || rng.random::<f64>() * pre.upper < cfg.kernel.eval(x, y)
}

/// One accepted jump from `x` with `ε = cfg.epsilon(ρ(x))`: Pareto radius,
/// uniform direction, acceptance `κ(x,y)/C₂` and, censored, membership in G.
pub fn sample_jump(x: &Point, cfg: &JumpChainConfig, rng: &mut PathRng) -> Result<Point, SimulationError> {
    let n = x.dim();
    let pre = prepare(cfg, n)?;
    let eps = cfg.epsilon(cfg.domain.distance(x));
    for _ in 0..MAX_CONSECUTIVE_REJECTIONS {
        let y = *x + uniform_direction(n, rng) * pareto_radius(eps, cfg.alpha, rng);
        if accepts(cfg, &pre, x, &y, rng) {
            return Ok(y);
        }
    }
    Err(SimulationError::AcceptanceFailure { at: *x, rejections: MAX_CONSECUTIVE_REJECTIONS })
}

/// Runs one path; `observe(x, dt)` sees every holding interval.
pub(crate) fn simulate(
    start: &Point,
    cfg: &JumpChainConfig,
    stop: &StopRule,
    rng: &mut PathRng,
    mut observe: impl FnMut(&Point, f64),
) -> Result<ExitRecord, SimulationError> {
    let n = start.dim();
    let pre = prepare(cfg, n)?;
    if !cfg.domain.contains(start) {
        return Err(SimulationError::StartOutsideDomain(*start));
    }
    let mut rec = ExitRecord {
        exit_position: *start,
        classification: ExitKind::LeftRegion,
        steps: 0,
        proposals: 0,
        process_time: 0.0,
    };
    let finish = |mut rec: ExitRecord, at: Point, kind: ExitKind| {
        rec.exit_position = at;
        rec.classification = kind;
        Ok(rec)
    };
    let classify = |rec: ExitRecord, at: Point| {
        let kind = if stop.target.contains(&at) { ExitKind::JumpedToTarget } else { ExitKind::LeftRegion };
        finish(rec, at, kind)
    };
    if !stop.run.contains(start) {
        return classify(rec, *start);
    }
    let alpha = cfg.alpha;
    let mut x = *start;
    let mut rejections = 0;
    loop {
        if rec.steps >= cfg.max_steps {
            return finish(rec, x, ExitKind::BudgetExhausted);
        }
        let rho = cfg.domain.distance(&x);
        if rho < cfg.boundary_absorb_delta {
            return finish(rec, x, ExitKind::AbsorbedAtBoundary);
        }
        let eps = cfg.epsilon(rho);
        let rate = proposal_rate(n, alpha, pre.upper, eps, pre.a_const);
        let mut tau = -(1.0 - rng.random::<f64>()).ln() / rate;
        let mut at_horizon = false;
        if let Some(h) = stop.horizon {
            if rec.process_time + tau >= h {
                tau = (h - rec.process_time).max(0.0);
                at_horizon = true;
            }
        }
        observe(&x, tau);
        rec.process_time += tau;
        if cfg.small_jump_diffusion && tau > 0.0 {
            let kxx = if pre.accept_all { pre.upper } else { cfg.kernel.eval(&x, &x) };
            let s = (small_jump_variance(n, alpha, kxx, eps, pre.a_const) * tau).sqrt();
            let mut y = x;
            for i in 0..n {
                y.set(i, x[i] + s * rng.sample::<f64, _>(StandardNormal));
            }
            if !cfg.domain.contains(&y) {
                // continuous motion reached the boundary
                return match cfg.mode {
                    Mode::Censored => finish(rec, crossing(cfg, &x, &y), ExitKind::AbsorbedAtBoundary),
                    Mode::Killed => classify(rec, y),
                };
            }
            x = y;
            if !stop.run.contains(&x) {
                return classify(rec, x);
            }
        }
        if at_horizon {
            return finish(rec, x, ExitKind::HorizonReached);
        }
        rec.proposals += 1;
        let y = x + uniform_direction(n, rng) * pareto_radius(eps, alpha, rng);
        if !accepts(cfg, &pre, &x, &y, rng) {
            rejections += 1;
            if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(SimulationError::AcceptanceFailure { at: x, rejections });
            }
            continue;
        }
        rejections = 0;
        rec.steps += 1;
        x = y;
        if !stop.run.contains(&x) || !cfg.domain.contains(&x) {
            return classify(rec, x);
        }
    }
}

/// Last point of the segment `x → y` inside the domain, by bisection.
fn crossing(cfg: &JumpChainConfig, x: &Point, y: &Point) -> Point {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if cfg.domain.contains(&(*x + (*y - *x) * mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    *x + (*y - *x) * lo
}

/// Path `index` of the ensemble defined by `cfg.rng_seed`.
pub fn run_path(start: &Point, cfg: &JumpChainConfig, stop: &StopRule, index: u64) -> Result<ExitRecord, SimulationError> {
    let mut rng = path_rng(cfg.rng_seed, index);
    simulate(start, cfg, stop, &mut rng, |_, _| {})
}
