//! Radial × angular quadrature of `∫ N(y) |y-x|^{-n-α} dy` in polar
//! coordinates about x, pairing each direction with its antipode.

use std::f64::consts::{LN_2, PI};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::geometry::{DomainGeometry, Point};
use crate::numerics::{graded_nodes, graded_sum, Endpoint, GradedParams};

pub(crate) type BreakFn<'a> = dyn Fn(&Point, &Point, f64, &mut Vec<f64>) + Sync + 'a;

pub(crate) struct RayProblem<'a> {
    pub x: Point,
    pub alpha: f64,
    /// Numerator N(y); membership tests live inside it.
    pub numerator: &'a (dyn Fn(&Point) -> f64 + Sync),
    /// Surfaces whose ray crossings become breakpoints.
    pub surfaces: Vec<&'a DomainGeometry>,
    pub extra_breaks: Option<&'a BreakFn<'a>>,
    /// N ~ dist^e at surface crossings.
    pub crossing_exponent: f64,
    /// Paired numerator ~ r^s as r -> 0 (s = 2 for C² data).
    pub local_order: f64,
    /// |N(y)| = O(|y|^q).
    pub growth: f64,
    /// Decreasing cutoffs; shells between them give the ε-trace. Empty when
    /// the integral starts at `r_min` instead of 0.
    pub cutoffs: Vec<f64>,
    pub r_min: f64,
    pub far: f64,
    pub pole: Point,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Level {
    radial: GradedParams,
    theta: GradedParams,
    phi: usize,
}

impl Level {
    pub fn new(l: usize) -> Level {
        Level {
            radial: GradedParams { order: 6 + 3 * l, depth: 8 + 4 * l, panels: 1 },
            theta: GradedParams { order: 6 + 3 * l, depth: 5 + 3 * l, panels: 1 },
            phi: 8 * (l + 1),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LevelResult {
    pub total: f64,
    /// Integral restricted to r > cutoffs[k], for each k.
    pub partials: Vec<f64>,
    /// Spread between the two- and three-term core models.
    pub core_spread: f64,
}

#[derive(Clone, Copy)]
struct Break {
    r: f64,
    exponent: Option<f64>,
}

impl<'a> RayProblem<'a> {
    fn paired(&self, dir: &Point, r: f64) -> f64 {
        let n = self.numerator;
        n(&(self.x + *dir * r)) + n(&(self.x - *dir * r))
    }

    fn breaks(&self, dir: &Point, start: f64, out: &mut Vec<Break>) {
        let r_max = 1e4 * self.far.max(self.x.norm());
        let mut radii = Vec::new();
        out.clear();
        for s in &self.surfaces {
            for d in [*dir, -*dir] {
                radii.clear();
                s.ray_crossings(&self.x, &d, r_max, &mut radii);
                out.extend(radii.iter().map(|&r| Break { r, exponent: Some(self.crossing_exponent) }));
            }
        }
        if let Some(f) = self.extra_breaks {
            for d in [*dir, -*dir] {
                radii.clear();
                f(&self.x, &d, r_max, &mut radii);
                out.extend(radii.iter().map(|&r| Break { r, exponent: Some(0.0) }));
            }
        }
        out.push(Break { r: self.far, exponent: None });
        out.retain(|b| b.r > start * (1.0 + 1e-12));
        out.sort_by(|a, b| a.r.total_cmp(&b.r));
        out.dedup_by(|b, a| {
            if (b.r - a.r).abs() <= 1e-12 * a.r {
                if a.exponent.is_none() {
                    a.exponent = b.exponent;
                }
                true
            } else {
                false
            }
        });
    }

    /// Integral along one direction pair. `shells[k]` covers
    /// `[cutoffs[k+1], cutoffs[k]]`; `core` covers `[0, cutoffs.last]`.
    fn ray(&self, dir: &Point, lv: &Level, scratch: &mut Vec<Break>, shells: &mut [f64]) -> (f64, (f64, f64)) {
        let alpha = self.alpha;
        let mut radial = |r: f64| self.paired(dir, r) * r.powf(-1.0 - alpha);
        let mut core = (0.0, 0.0);
        let start = if let Some(&first) = self.cutoffs.first() {
            for k in 0..self.cutoffs.len() - 1 {
                shells[k] = graded_sum(
                    &mut radial,
                    self.cutoffs[k + 1],
                    self.cutoffs[k],
                    Endpoint::Regular,
                    Endpoint::Regular,
                    &lv.radial,
                );
            }
            let last = *self.cutoffs.last().unwrap();
            core = self.core(dir, last);
            first
        } else {
            self.r_min
        };

        self.breaks(dir, start, scratch);
        let mut outer = 0.0;
        let mut a = Break { r: start, exponent: None };
        // log variable between breakpoints: s = ln r
        let mut logf = |s: f64| {
            let r = s.exp();
            self.paired(dir, r) * r.powf(-alpha)
        };
        for b in scratch.iter() {
            outer += log_segment(&mut logf, a, *b, &lv.radial);
            a = *b;
        }
        // tail: r = a·t^{-1/α}, dr·r^{-1-α} = (a^{-α}/α) dt
        let b0 = a.r;
        let mut tail = |t: f64| self.paired(dir, b0 * t.powf(-1.0 / alpha));
        let left = Endpoint::Singular((-self.growth / alpha).max(-0.99));
        let right = a.exponent.map_or(Endpoint::Regular, Endpoint::Singular);
        outer += b0.powf(-alpha) / alpha * graded_sum(&mut tail, 0.0, 1.0, left, right, &lv.radial);
        (outer, core)
    }

    /// `∫₀^c g(r) r^{-1-α} dr` for the paired numerator `g`, from the model
    /// `g(r) = Σ a_j r^{e_j}` fitted at `c, c/2, c/4`. Direct quadrature
    /// toward r = 0 is useless: `g` is a difference of O(1) values, so its
    /// rounding error, weighted by `r^{-1-α}`, grows without bound. Returns
    /// the three-term value and its distance from the two-term fit; NaN when
    /// `s <= α` (the principal value diverges).
    fn core(&self, dir: &Point, c: f64) -> (f64, f64) {
        let (s, alpha) = (self.local_order, self.alpha);
        if s <= alpha + 1e-9 {
            return (f64::NAN, f64::NAN);
        }
        let e = if s >= 2.0 { [2.0, 3.0, 4.0] } else { [s, 2.0, 3.0] };
        let r = [c, 0.5 * c, 0.25 * c];
        let g = r.map(|r| self.paired(dir, r));
        let primitive = |ej: f64| c.powf(ej - alpha) / (ej - alpha);
        let m3 = Matrix3::from_fn(|i, j| r[i].powf(e[j]));
        let three = m3.lu().solve(&Vector3::from(g)).map(|a| (0..3).map(|j| a[j] * primitive(e[j])).sum::<f64>());
        let m2 = Matrix2::from_fn(|i, j| r[i].powf(e[j]));
        let two = m2
            .lu()
            .solve(&Vector2::new(g[0], g[1]))
            .map(|a| a[0] * primitive(e[0]) + a[1] * primitive(e[1]));
        match (three, two) {
            (Some(v3), Some(v2)) => (v3, (v3 - v2).abs()),
            _ => (f64::NAN, f64::NAN),
        }
    }

    fn basis(&self) -> (Point, Point) {
        let n = self.x.dim();
        let p = self.pole;
        match n {
            2 => (Point::new(&[p[1], -p[0]]), Point::zeros(2)),
            3 => {
                let helper = if p[0].abs() < 0.9 { Point::axis(3, 0) } else { Point::axis(3, 1) };
                let t1 = cross(&p, &helper).normalized().unwrap();
                let t2 = cross(&p, &t1);
                (t1, t2)
            }
            _ => (Point::zeros(n), Point::zeros(n)),
        }
    }

    pub fn run(&self, lv: &Level) -> LevelResult {
        let n = self.x.dim();
        let k = self.cutoffs.len();
        let mut scratch = Vec::new();
        let mut shells = vec![0.0; k.saturating_sub(1)];
        let mut acc_outer = 0.0;
        let mut acc_core = 0.0;
        let mut acc_spread = 0.0;
        let mut acc_shells = vec![0.0; k.saturating_sub(1)];
        let mut add = |dir: Point, w: f64, scratch: &mut Vec<Break>, shells: &mut [f64]| {
            let (outer, core) = self.ray(&dir, lv, scratch, shells);
            acc_outer += w * outer;
            acc_core += w * core.0;
            acc_spread += w.abs() * core.1;
            for (a, s) in acc_shells.iter_mut().zip(shells.iter()) {
                *a += w * s;
            }
        };
        let (t1, t2) = self.basis();
        match n {
            1 => add(Point::new(&[1.0]), 1.0, &mut scratch, &mut shells),
            2 => {
                let mut nodes = Vec::new();
                theta_nodes(-0.5 * PI, 0.0, Endpoint::Singular(self.alpha), Endpoint::Singular(0.0), &lv.theta, &mut nodes);
                theta_nodes(0.0, 0.5 * PI, Endpoint::Singular(0.0), Endpoint::Singular(self.alpha), &lv.theta, &mut nodes);
                for (th, w) in nodes {
                    let dir = self.pole * th.cos() + t1 * th.sin();
                    add(dir, w, &mut scratch, &mut shells);
                }
            }
            _ => {
                let mut nodes = Vec::new();
                theta_nodes(0.0, 0.5 * PI, Endpoint::Regular, Endpoint::Singular(self.alpha), &lv.theta, &mut nodes);
                let m = lv.phi;
                for (th, w) in nodes {
                    let (s, c) = th.sin_cos();
                    for j in 0..m {
                        let ph = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                        let dir = self.pole * c + (t1 * ph.cos() + t2 * ph.sin()) * s;
                        add(dir, w * s * 2.0 * PI / m as f64, &mut scratch, &mut shells);
                    }
                }
            }
        }
        let mut partials = Vec::with_capacity(k);
        let mut run = acc_outer;
        for j in 0..k {
            partials.push(run);
            if j + 1 < k {
                run += acc_shells[j];
            }
        }
        let total = run + acc_core;
        LevelResult { total: if k == 0 { acc_outer } else { total }, partials, core_spread: acc_spread }
    }
}

fn cross(a: &Point, b: &Point) -> Point {
    Point::new(&[a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
}

fn theta_nodes(a: f64, b: f64, left: Endpoint, right: Endpoint, p: &GradedParams, out: &mut Vec<(f64, f64)>) {
    out.extend(graded_nodes(a, b, left, right, p));
}

fn log_segment(f: &mut impl FnMut(f64) -> f64, a: Break, b: Break, p: &GradedParams) -> f64 {
    let (sa, sb) = (a.r.ln(), b.r.ln());
    let w = sb - sa;
    if w <= 0.0 {
        return 0.0;
    }
    let left = a.exponent.map_or(Endpoint::Regular, Endpoint::Singular);
    let right = b.exponent.map_or(Endpoint::Regular, Endpoint::Singular);
    // graded pieces of width <= ln 2 at singular ends, uniform panels between
    let g = (0.5 * w).min(LN_2);
    let mut lo = sa;
    let mut hi = sb;
    let mut acc = 0.0;
    if let Endpoint::Singular(_) = left {
        acc += graded_sum(f, sa, sa + g, left, Endpoint::Regular, p);
        lo = sa + g;
    }
    if let Endpoint::Singular(_) = right {
        acc += graded_sum(f, sb - g, sb, Endpoint::Regular, right, p);
        hi = sb - g;
    }
    if hi > lo {
        let panels = ((hi - lo) / LN_2).ceil().max(1.0) as usize;
        acc += graded_sum(f, lo, hi, Endpoint::Regular, Endpoint::Regular, &GradedParams { panels, ..*p });
    }
    acc
}
