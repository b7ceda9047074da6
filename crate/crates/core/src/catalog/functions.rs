use crate::geometry::{BoundaryGraph, DomainGeometry, GraphShape, Point};
use crate::operator::ScalarField;

/// Free constants of the barrier combinations. Existence-only in theory;
/// the defaults pass the sign checks on `Γ = |x̃|^{1.8}`, α = 1.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    /// Comparability constant between the truncated powers and `ρ^p`.
    pub a4: f64,
    /// Box scale.
    pub k1: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams { a4: 1.5, k1: 0.25 }
    }
}

impl BarrierParams {
    pub fn phi_coefficient(&self) -> f64 {
        12.0 * self.a4.powi(3) / (self.k1 * self.k1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// `u_{α-1} + u_p`
    Sum,
    /// `u_{α-1} - u_p/(2A₄²) + 12 k₁^{-2} A₄³ φ`
    Corrected,
    /// the corrected barrier inside `B(0, 1/2)`, 1 outside
    Capped,
}

#[derive(Debug, Clone)]
pub enum PowerFunction {
    /// `y_n^p` on the half-space.
    HalfSpace { dim: usize, p: f64 },
    /// `(y_n - Γ(ỹ))^p · 1{|ỹ| < lateral}` on the graph domain.
    GraphHeight { graph: BoundaryGraph, p: f64, lateral: f64 },
    /// `(y_n - Γ(ỹ))^p · 1{|y - Q| < radius}`, `Q = (0̃, Γ(0̃))`.
    Truncated { graph: BoundaryGraph, p: f64, radius: f64 },
    Barrier { kind: BarrierKind, graph: BoundaryGraph, alpha: f64, p: f64, params: BarrierParams },
}

pub const LATERAL_CUTOFF: f64 = 2.0;
pub const TRUNCATION_RADIUS: f64 = 2.0 / 3.0;
const CAP_RADIUS: f64 = 0.5;

impl PowerFunction {
    pub fn half_space(dim: usize, p: f64) -> Self {
        PowerFunction::HalfSpace { dim, p }
    }

    pub fn graph_height(graph: BoundaryGraph, p: f64) -> Self {
        PowerFunction::GraphHeight { graph, p, lateral: LATERAL_CUTOFF }
    }

    pub fn truncated(graph: BoundaryGraph, p: f64) -> Self {
        PowerFunction::Truncated { graph, p, radius: TRUNCATION_RADIUS }
    }

    /// Barrier with the interior exponent `p = (α - 1 + min(α + β - 2, 1))/2`.
    pub fn barrier(kind: BarrierKind, graph: BoundaryGraph, alpha: f64, params: BarrierParams) -> Self {
        let beta = graph.hoelder_order();
        let p = barrier_exponent(alpha, beta);
        PowerFunction::Barrier { kind, graph, alpha, p, params }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            PowerFunction::HalfSpace { p, .. }
            | PowerFunction::GraphHeight { p, .. }
            | PowerFunction::Truncated { p, .. }
            | PowerFunction::Barrier { p, .. } => *p,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PowerFunction::HalfSpace { dim, .. } => *dim,
            PowerFunction::GraphHeight { graph, .. }
            | PowerFunction::Truncated { graph, .. }
            | PowerFunction::Barrier { graph, .. } => graph.dim(),
        }
    }

    /// The domain the function lives on.
    pub fn domain(&self) -> DomainGeometry {
        match self {
            PowerFunction::HalfSpace { dim, .. } => DomainGeometry::half_space(*dim),
            PowerFunction::GraphHeight { graph, .. }
            | PowerFunction::Truncated { graph, .. }
            | PowerFunction::Barrier { graph, .. } => DomainGeometry::graph(graph.clone()),
        }
    }

    pub fn eval(&self, y: &Point) -> f64 {
        match self {
            PowerFunction::HalfSpace { p, .. } => {
                if y.last() > 0.0 {
                    y.last().powf(*p)
                } else {
                    0.0
                }
            }
            PowerFunction::GraphHeight { graph, p, lateral } => {
                let h = y.last() - graph.value(y.tilde());
                if h > 0.0 && y.tilde_norm() < *lateral {
                    h.powf(*p)
                } else {
                    0.0
                }
            }
            PowerFunction::Truncated { graph, p, radius } => truncated_power(graph, *p, *radius, y),
            PowerFunction::Barrier { kind, graph, alpha, p, params } => {
                let h = y.last() - graph.value(y.tilde());
                if h <= 0.0 {
                    return 0.0;
                }
                if *kind == BarrierKind::Capped && y.norm() >= CAP_RADIUS {
                    return 1.0;
                }
                let low = truncated_power(graph, alpha - 1.0, TRUNCATION_RADIUS, y);
                let high = truncated_power(graph, *p, TRUNCATION_RADIUS, y);
                match kind {
                    BarrierKind::Sum => low + high,
                    _ => {
                        let a4 = params.a4;
                        low - high / (2.0 * a4 * a4) + params.phi_coefficient() * phi_cap(y)
                    }
                }
            }
        }
    }
}

/// `p = (α - 1 + min(α + β - 2, 1))/2`, strictly between `α - 1` and `α`.
pub fn barrier_exponent(alpha: f64, beta: f64) -> f64 {
    0.5 * (alpha - 1.0 + (alpha + beta - 2.0).min(1.0))
}

fn truncated_power(graph: &BoundaryGraph, p: f64, radius: f64, y: &Point) -> f64 {
    let h = y.last() - graph.value(y.tilde());
    let q = Point::zeros(y.dim()).with_last(graph.value(&vec![0.0; y.dim() - 1]));
    if h > 0.0 && y.dist(&q) < radius {
        h.powf(p)
    } else {
        0.0
    }
}

/// C² quintic step from 0 at `s = 0` to 1 at `s = 1`.
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `|ỹ|²` near the origin blended into the constant 3/2 on `1/2 ≤ |y| ≤ 1`;
/// C² with values in `[0, 2]` and in `[1, 2]` for `|y| ≥ 1`.
pub fn phi_cap(y: &Point) -> f64 {
    let chi = smoothstep(2.0 * y.norm() - 1.0);
    let t = y.tilde_norm();
    (1.0 - chi) * t * t + chi * 1.5
}

fn positive_roots(a: f64, b: f64, c: f64, r_max: f64, out: &mut Vec<f64>) {
    if a <= 0.0 {
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = [q / a, if q != 0.0 { c / q } else { -b / a }];
    roots.sort_by(f64::total_cmp);
    out.extend(roots.into_iter().filter(|&r| r > 0.0 && r <= r_max));
}

/// Radii where `x + r·dir` crosses `|ỹ| = radius`.
fn cylinder_crossings(x: &Point, dir: &Point, radius: f64, r_max: f64, out: &mut Vec<f64>) {
    let n = x.dim();
    let (mut a, mut b, mut c) = (0.0, 0.0, -radius * radius);
    for i in 0..n - 1 {
        a += dir[i] * dir[i];
        b += 2.0 * x[i] * dir[i];
        c += x[i] * x[i];
    }
    positive_roots(a, b, c, r_max, out);
}

/// Radii where `x + r·dir` crosses the sphere `|y - center| = radius`.
fn sphere_crossings(x: &Point, dir: &Point, center: &Point, radius: f64, r_max: f64, out: &mut Vec<f64>) {
    let d = *x - *center;
    positive_roots(dir.norm_sq(), 2.0 * d.dot(dir), d.norm_sq() - radius * radius, r_max, out);
}

fn graph_regularity(graph: &BoundaryGraph, x: &Point) -> f64 {
    match graph.shape() {
        GraphShape::Zero | GraphShape::Affine { .. } => 2.0,
        _ if x.tilde_norm() < 1e-12 => graph.hoelder_order().min(2.0),
        _ => 2.0,
    }
}

impl ScalarField for PowerFunction {
    fn value(&self, y: &Point) -> f64 {
        self.eval(y)
    }

    fn local_regularity(&self, x: &Point) -> f64 {
        match self {
            PowerFunction::HalfSpace { .. } => 2.0,
            PowerFunction::GraphHeight { graph, .. }
            | PowerFunction::Truncated { graph, .. }
            | PowerFunction::Barrier { graph, .. } => graph_regularity(graph, x),
        }
    }

    fn edge_exponent(&self) -> f64 {
        match self {
            PowerFunction::Barrier { alpha, p, .. } => (alpha - 1.0).min(*p),
            f => f.exponent(),
        }
    }

    fn growth_exponent(&self) -> f64 {
        match self {
            PowerFunction::HalfSpace { p, .. } => p.max(0.0),
            _ => 0.0,
        }
    }

    fn ray_breaks(&self, x: &Point, dir: &Point, r_max: f64, out: &mut Vec<f64>) {
        let n = x.dim();
        let origin = |graph: &BoundaryGraph| Point::zeros(n).with_last(graph.value(&vec![0.0; n - 1]));
        match self {
            PowerFunction::HalfSpace { .. } => {}
            PowerFunction::GraphHeight { lateral, .. } => {
                if n >= 2 {
                    cylinder_crossings(x, dir, *lateral, r_max, out);
                }
            }
            PowerFunction::Truncated { graph, radius, .. } => {
                sphere_crossings(x, dir, &origin(graph), *radius, r_max, out);
            }
            PowerFunction::Barrier { kind, graph, .. } => {
                sphere_crossings(x, dir, &origin(graph), TRUNCATION_RADIUS, r_max, out);
                let zero = Point::zeros(n);
                sphere_crossings(x, dir, &zero, CAP_RADIUS, r_max, out);
                if *kind != BarrierKind::Capped {
                    sphere_crossings(x, dir, &zero, 1.0, r_max, out);
                }
            }
        }
    }
}
