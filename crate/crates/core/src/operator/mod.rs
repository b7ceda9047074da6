//! Principal-value evaluation of the regional operator with a jump kernel κ,
//! and of the full-space fractional Laplacian for functions vanishing outside
//! a set.
//!
//! Integrals are taken in polar coordinates about the evaluation point `x`,
//! pairing each direction with its antipode so the first-order term of
//! `u(y) - u(x)` cancels. The inner ball `B(x, ρ(x)/2)` is cut into dyadic
//! shells at the ε-schedule, which yields the truncated values `PV_ε` for
//! free; the innermost core uses a Jacobi rule keyed to the local regularity
//! of `u`. Outside, radii are split at every ray/boundary crossing and the
//! tail beyond the far-field radius is mapped to `(0, 1]`.

mod engine;
mod generator;

pub use generator::GridGenerator;

use thiserror::Error;

use crate::catalog::normalization_constant;
use crate::geometry::{DomainGeometry, Point};
use crate::kernels::Kernel;
use crate::numerics::QuadratureSpec;
use engine::{Level, LevelResult, RayProblem};

/// A real function on R^n together with the structural hints the quadrature
/// needs.
pub trait ScalarField: Send + Sync {
    fn value(&self, y: &Point) -> f64;

    /// Hölder order of `u` at `x`, capped at 2 (2 means C² or better).
    fn local_regularity(&self, _x: &Point) -> f64 {
        2.0
    }

    /// `u ~ dist^e` where the domain boundary cuts its support.
    fn edge_exponent(&self) -> f64 {
        0.0
    }

    /// `|u(y)| = O(|y|^q)` at infinity.
    fn growth_exponent(&self) -> f64 {
        0.0
    }

    /// Radii where `u` is not smooth along `x + r·dir` besides domain crossings
    /// (cutoff surfaces of truncated functions).
    fn ray_breaks(&self, _x: &Point, _dir: &Point, _r_max: f64, _out: &mut Vec<f64>) {}
}

/// A closure with declared hints.
pub struct FnField<F> {
    f: F,
    regularity: f64,
    growth: f64,
}

impl<F: Fn(&Point) -> f64 + Send + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        FnField { f, regularity: 2.0, growth: 0.0 }
    }

    pub fn regularity(mut self, s: f64) -> Self {
        self.regularity = s;
        self
    }

    pub fn growth(mut self, q: f64) -> Self {
        self.growth = q;
        self
    }
}

impl<F: Fn(&Point) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn value(&self, y: &Point) -> f64 {
        (self.f)(y)
    }
    fn local_regularity(&self, _x: &Point) -> f64 {
        self.regularity
    }
    fn growth_exponent(&self) -> f64 {
        self.growth
    }
}

/// `a·u + b·v`.
pub struct Combination<'a> {
    pub terms: Vec<(f64, &'a dyn ScalarField)>,
}

impl ScalarField for Combination<'_> {
    fn value(&self, y: &Point) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(y)).sum()
    }
    fn local_regularity(&self, x: &Point) -> f64 {
        self.terms.iter().map(|(_, f)| f.local_regularity(x)).fold(2.0, f64::min)
    }
    fn edge_exponent(&self) -> f64 {
        self.terms.iter().map(|(_, f)| f.edge_exponent()).fold(f64::INFINITY, f64::min).min(2.0)
    }
    fn growth_exponent(&self) -> f64 {
        self.terms.iter().map(|(_, f)| f.growth_exponent()).fold(0.0, f64::max)
    }
    fn ray_breaks(&self, x: &Point, dir: &Point, r_max: f64, out: &mut Vec<f64>) {
        for (_, f) in &self.terms {
            f.ray_breaks(x, dir, r_max, out);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("evaluation point is not inside the domain")]
    NotInDomain,
    #[error("alpha = {0} outside (0, 2)")]
    InvalidAlpha(f64),
    #[error("dimension {0} unsupported")]
    Dimension(usize),
}

pub struct OperatorProblem<'a> {
    pub u: &'a dyn ScalarField,
    pub domain: &'a DomainGeometry,
    pub kernel: &'a Kernel,
    pub alpha: f64,
    pub far_field_radius: f64,
    pub quad: QuadratureSpec,
}

impl<'a> OperatorProblem<'a> {
    pub fn new(u: &'a dyn ScalarField, domain: &'a DomainGeometry, kernel: &'a Kernel, alpha: f64) -> Self {
        OperatorProblem {
            u,
            domain,
            kernel,
            alpha,
            far_field_radius: DEFAULT_FAR_FIELD,
            quad: QuadratureSpec::new(1e-7, 1e-6),
        }
    }

    pub fn with_quad(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_far_field(mut self, r: f64) -> Self {
        self.far_field_radius = r;
        self
    }
}

pub const DEFAULT_FAR_FIELD: f64 = 8.0;
pub const DEFAULT_SWEEP_LEVELS: usize = 12;
pub const SWEEP_WINDOW: usize = 4;
const MIN_LEVEL: usize = 1;
const MAX_LEVEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVerdict {
    Convergent,
    DivergentNegative,
    DivergentPositive,
}

#[derive(Debug, Clone)]
pub struct PvEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    /// `(ε, A·∫_{|y-x|>ε})`, ε strictly decreasing.
    pub epsilon_trace: Vec<(f64, f64)>,
    pub verdict: SweepVerdict,
    pub level: usize,
}

impl PvEstimate {
    pub fn diverged(&self) -> bool {
        self.verdict != SweepVerdict::Convergent
    }
}

/// Default cutoffs `ρ/2^{k+1}`, k = 0..levels.
pub fn default_schedule(rho: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| rho / 2f64.powi(k as i32 + 1)).collect()
}

/// Divergence verdict from the last `SWEEP_WINDOW` increments of the ε-trace.
///
/// Increments of a convergent PV shrink geometrically, so an Aitken
/// extrapolation of the increment sequence tends to 0. A logarithmic
/// divergence adds a fixed amount per dyadic level: the extrapolated increment
/// stays comparable to the last one. Heuristic; thresholds are not sharp.
pub fn sweep_verdict(partials: &[f64]) -> SweepVerdict {
    if partials.len() < SWEEP_WINDOW + 1 {
        return SweepVerdict::Convergent;
    }
    let d: Vec<f64> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &d[d.len() - SWEEP_WINDOW..];
    let scale = partials.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if tail.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return SweepVerdict::Convergent;
    }
    let same_sign = tail.iter().all(|v| *v < 0.0) || tail.iter().all(|v| *v > 0.0);
    if !same_sign {
        return SweepVerdict::Convergent;
    }
    let last = tail[SWEEP_WINDOW - 1];
    let limit = |a: f64, b: f64, c: f64| {
        let d2 = c - 2.0 * b + a;
        if d2.abs() <= 1e-12 * c.abs() {
            c
        } else {
            c - (c - b) * (c - b) / d2
        }
    };
    let l1 = limit(tail[0], tail[1], tail[2]);
    let l2 = limit(tail[1], tail[2], tail[3]);
    let persistent = |l: f64| l.signum() == last.signum() && l.abs() >= 0.5 * last.abs();
    if persistent(l1) && persistent(l2) {
        if last < 0.0 {
            SweepVerdict::DivergentNegative
        } else {
            SweepVerdict::DivergentPositive
        }
    } else {
        SweepVerdict::Convergent
    }
}

fn check_alpha(alpha: f64) -> Result<(), OperatorError> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(OperatorError::InvalidAlpha(alpha))
    }
}

/// Runs the level loop for a ray problem scaled by `scale`. A non-finite core
/// (principal value diverges at the point) leaves the finest partial as the
/// value, unconverged.
fn solve(rp: &RayProblem, scale: f64, quad: &QuadratureSpec) -> PvEstimate {
    let mut prev: Option<LevelResult> = None;
    let mut out = None;
    for l in MIN_LEVEL..=MAX_LEVEL {
        let cur = rp.run(&Level::new(l));
        if let Some(p) = &prev {
            let mut err = scale.abs() * ((cur.total - p.total).abs() + cur.core_spread);
            let mut value = scale * cur.total;
            let finite = value.is_finite();
            if !finite {
                let last = |r: &LevelResult| r.partials.last().copied().unwrap_or(r.total);
                value = scale * last(&cur);
                err = scale.abs() * (last(&cur) - last(p)).abs();
            }
            let converged = finite && err <= quad.tolerance_for(value);
            let stop = converged || (!finite && err <= quad.tolerance_for(value));
            out = Some((cur.clone(), value, err, converged, l));
            if stop {
                break;
            }
        }
        prev = Some(cur);
    }
    let (res, value, err, converged, level) = out.expect("at least two levels");
    let partials: Vec<f64> = res.partials.iter().map(|v| scale * v).collect();
    let verdict = if rp.cutoffs.is_empty() { SweepVerdict::Convergent } else { sweep_verdict(&partials) };
    PvEstimate {
        value,
        error_estimate: err,
        converged: converged && verdict == SweepVerdict::Convergent,
        epsilon_trace: rp.cutoffs.iter().cloned().zip(partials).collect(),
        verdict,
        level,
    }
}

fn regional_with_cutoffs(
    p: &OperatorProblem,
    x: &Point,
    weight: &(dyn Fn(&Point) -> f64 + Sync),
    cutoffs: Option<Vec<f64>>,
    regularity_cap: f64,
) -> Result<PvEstimate, OperatorError> {
    check_alpha(p.alpha)?;
    let n = x.dim();
    if !(1..=3).contains(&n) {
        return Err(OperatorError::Dimension(n));
    }
    if !p.domain.contains(x) {
        return Err(OperatorError::NotInDomain);
    }
    let ux = p.u.value(x);
    let dom = p.domain;
    let u = p.u;
    let numerator = |y: &Point| if dom.contains(y) { weight(y) * (u.value(y) - ux) } else { 0.0 };
    let breaks = |x: &Point, d: &Point, r: f64, out: &mut Vec<f64>| u.ray_breaks(x, d, r, out);
    let rho = dom.distance(x);
    let s = u.local_regularity(x).min(regularity_cap);
    let rp = RayProblem {
        x: *x,
        alpha: p.alpha,
        numerator: &numerator,
        surfaces: vec![dom],
        extra_breaks: Some(&breaks),
        crossing_exponent: u.edge_exponent(),
        local_order: s,
        growth: u.growth_exponent(),
        cutoffs: cutoffs.unwrap_or_else(|| default_schedule(rho, DEFAULT_SWEEP_LEVELS)),
        r_min: 0.0,
        far: p.far_field_radius,
        pole: dom.inward_normal(x),
    };
    Ok(solve(&rp, normalization_constant(n, p.alpha).map_err(|_| OperatorError::InvalidAlpha(p.alpha))?, &p.quad))
}

/// `A(n,-α)·PV ∫_G κ(x,y)(u(y)-u(x))/|x-y|^{n+α} dy`.
pub fn regional_pv(p: &OperatorProblem, x: &Point) -> Result<PvEstimate, OperatorError> {
    let k = p.kernel;
    let x0 = *x;
    regional_with_cutoffs(p, x, &move |y: &Point| k.eval(&x0, y), None, 2.0)
}

/// Truncated values `PV_ε` at the given decreasing cutoffs, with the verdict.
pub fn epsilon_sweep(p: &OperatorProblem, x: &Point, schedule: &[f64]) -> Result<PvEstimate, OperatorError> {
    let k = p.kernel;
    let x0 = *x;
    regional_with_cutoffs(p, x, &move |y: &Point| k.eval(&x0, y), Some(schedule.to_vec()), 2.0)
}

/// The two addends of
/// `Δκ u(x) = A·PV∫(κ(x,y)-κ(x,x))(u(y)-u(x))|x-y|^{-n-α} + κ(x,x)·Δ u(x)`.
pub fn commutator_split(p: &OperatorProblem, x: &Point) -> Result<(PvEstimate, PvEstimate), OperatorError> {
    let k = p.kernel;
    let x0 = *x;
    let kxx = k.eval(x, x);
    let inhom = regional_with_cutoffs(p, x, &move |y: &Point| k.eval(&x0, y) - kxx, None, 2.0)?;
    let mut hom = regional_with_cutoffs(p, x, &|_: &Point| 1.0, None, 2.0)?;
    hom.value *= kxx;
    hom.error_estimate *= kxx.abs();
    for t in &mut hom.epsilon_trace {
        t.1 *= kxx;
    }
    Ok((inhom, hom))
}

/// `A(n,-α)·PV ∫_{R^n} (u(y)-u(x))/|x-y|^{n+α} dy` for `u` vanishing outside
/// `support`.
pub fn fullspace_pv(
    u: &dyn ScalarField,
    support: &DomainGeometry,
    x: &Point,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<PvEstimate, OperatorError> {
    check_alpha(alpha)?;
    if !support.contains(x) {
        return Err(OperatorError::NotInDomain);
    }
    let n = x.dim();
    let ux = u.value(x);
    let numerator = |y: &Point| u.value(y) - ux;
    let breaks = |x: &Point, d: &Point, r: f64, out: &mut Vec<f64>| u.ray_breaks(x, d, r, out);
    let rho = support.distance(x);
    let rp = RayProblem {
        x: *x,
        alpha,
        numerator: &numerator,
        surfaces: vec![support],
        extra_breaks: Some(&breaks),
        crossing_exponent: u.edge_exponent(),
        local_order: u.local_regularity(x).min(2.0),
        growth: u.growth_exponent(),
        cutoffs: default_schedule(rho, DEFAULT_SWEEP_LEVELS),
        r_min: 0.0,
        far: DEFAULT_FAR_FIELD,
        pole: support.inward_normal(x),
    };
    Ok(solve(&rp, normalization_constant(n, alpha).map_err(|_| OperatorError::InvalidAlpha(alpha))?, quad))
}

/// `∫_G |f(y)-f(x)|·|h(y)-h(x)| / |y-x|^{n+α} dy` (no normalization constant).
pub fn cross_term_integral(
    f: &dyn ScalarField,
    h: &dyn ScalarField,
    dom: &DomainGeometry,
    x: &Point,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<PvEstimate, OperatorError> {
    check_alpha(alpha)?;
    if !dom.contains(x) {
        return Err(OperatorError::NotInDomain);
    }
    let (fx, hx) = (f.value(x), h.value(x));
    let numerator =
        |y: &Point| if dom.contains(y) { (f.value(y) - fx).abs() * (h.value(y) - hx).abs() } else { 0.0 };
    let breaks = |x: &Point, d: &Point, r: f64, out: &mut Vec<f64>| {
        f.ray_breaks(x, d, r, out);
        h.ray_breaks(x, d, r, out);
    };
    let rho = dom.distance(x);
    let s = f.local_regularity(x).min(1.0) + h.local_regularity(x).min(1.0);
    let rp = RayProblem {
        x: *x,
        alpha,
        numerator: &numerator,
        surfaces: vec![dom],
        extra_breaks: Some(&breaks),
        crossing_exponent: h.edge_exponent(),
        local_order: s,
        growth: f.growth_exponent() + h.growth_exponent(),
        cutoffs: default_schedule(rho, DEFAULT_SWEEP_LEVELS),
        r_min: 0.0,
        far: DEFAULT_FAR_FIELD,
        pole: dom.inward_normal(x),
    };
    Ok(solve(&rp, 1.0, quad))
}

/// Jump intensity `A·∫_{target, |y-x|>ε} κ(x,y)|x-y|^{-n-α} dy` of the
/// ε-truncated chain.
pub fn truncated_jump_rate(
    kernel: &Kernel,
    target: &DomainGeometry,
    x: &Point,
    alpha: f64,
    epsilon: f64,
    quad: &QuadratureSpec,
) -> Result<PvEstimate, OperatorError> {
    check_alpha(alpha)?;
    let n = x.dim();
    let x0 = *x;
    let numerator = |y: &Point| if target.contains(y) { kernel.eval(&x0, y) } else { 0.0 };
    let rp = RayProblem {
        x: *x,
        alpha,
        numerator: &numerator,
        surfaces: vec![target],
        extra_breaks: None,
        crossing_exponent: 0.0,
        local_order: 2.0,
        growth: 0.0,
        cutoffs: Vec::new(),
        r_min: epsilon,
        far: DEFAULT_FAR_FIELD.max(2.0 * epsilon),
        pole: if target.contains(x) { target.inward_normal(x) } else { Point::axis(n, n - 1) },
    };
    Ok(solve(&rp, normalization_constant(n, alpha).map_err(|_| OperatorError::InvalidAlpha(alpha))?, quad))
}

#[cfg(test)]
mod tests;
