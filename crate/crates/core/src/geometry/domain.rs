use super::graph::{norm, BoundaryGraph, GraphShape};
use super::point::Point;
use super::GeometryError;

/// The open domains used throughout the crate.
#[derive(Debug, Clone)]
pub enum DomainGeometry {
    HalfSpace { dim: usize },
    Graph(BoundaryGraph),
    Ball { center: Point, radius: f64 },
    /// `{x_n > Λ|x̃|}`; distances use the closed form for a cone.
    Wedge { dim: usize, slope: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub foot: Point,
    pub distance: f64,
    pub approximate: bool,
    pub ambiguous: bool,
}

impl DomainGeometry {
    pub fn half_space(dim: usize) -> Self {
        DomainGeometry::HalfSpace { dim }
    }

    pub fn ball(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0);
        DomainGeometry::Ball { center, radius }
    }

    pub fn wedge(dim: usize, slope: f64) -> Self {
        assert!(dim >= 2 && slope > 0.0);
        DomainGeometry::Wedge { dim, slope }
    }

    pub fn graph(g: BoundaryGraph) -> Self {
        DomainGeometry::Graph(g)
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainGeometry::HalfSpace { dim } | DomainGeometry::Wedge { dim, .. } => *dim,
            DomainGeometry::Graph(g) => g.dim(),
            DomainGeometry::Ball { center, .. } => center.dim(),
        }
    }

    /// The wedge as a graph domain `Γ = Λ|x̃|`.
    pub fn as_graph(&self) -> Option<BoundaryGraph> {
        match self {
            DomainGeometry::HalfSpace { dim } => Some(BoundaryGraph::zero(*dim)),
            DomainGeometry::Graph(g) => Some(g.clone()),
            DomainGeometry::Wedge { dim, slope } => Some(BoundaryGraph::cone(*dim, *slope)),
            DomainGeometry::Ball { .. } => None,
        }
    }

    /// Lipschitz constant of the boundary graph, when finite.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self {
            DomainGeometry::HalfSpace { .. } => Some(0.0),
            DomainGeometry::Wedge { slope, .. } => Some(*slope),
            DomainGeometry::Graph(g) => match g.shape() {
                GraphShape::Zero => Some(0.0),
                GraphShape::Affine { gradient, .. } => Some(norm(gradient)),
                GraphShape::Cone { slope } => Some(*slope),
                _ => None,
            },
            DomainGeometry::Ball { .. } => None,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match self {
            DomainGeometry::HalfSpace { .. } => x.last() > 0.0,
            DomainGeometry::Graph(g) => x.last() > g.value(x.tilde()),
            DomainGeometry::Ball { center, radius } => x.dist(center) < *radius,
            DomainGeometry::Wedge { slope, .. } => x.last() > slope * x.tilde_norm(),
        }
    }

    /// Height above the boundary graph, `x_n - Γ(x̃)`.
    pub fn height(&self, x: &Point) -> Result<f64, GeometryError> {
        match self {
            DomainGeometry::HalfSpace { .. } => Ok(x.last()),
            DomainGeometry::Graph(g) => Ok(x.last() - g.value(x.tilde())),
            DomainGeometry::Wedge { slope, .. } => Ok(x.last() - slope * x.tilde_norm()),
            DomainGeometry::Ball { .. } => Err(GeometryError::NotAGraph),
        }
    }

    /// Distance to the boundary.
    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            DomainGeometry::HalfSpace { .. } => x.last().abs(),
            DomainGeometry::Ball { center, radius } => (radius - x.dist(center)).abs(),
            DomainGeometry::Wedge { slope, .. } => wedge_distance(*slope, x),
            DomainGeometry::Graph(_) => self.project(x).distance,
        }
    }

    pub fn project(&self, x: &Point) -> Projection {
        match self {
            DomainGeometry::HalfSpace { .. } => Projection {
                foot: x.with_last(0.0),
                distance: x.last().abs(),
                approximate: false,
                ambiguous: false,
            },
            DomainGeometry::Ball { center, radius } => {
                let d = *x - *center;
                let r = d.norm();
                let dir = d.normalized().unwrap_or_else(|| Point::axis(x.dim(), 0));
                Projection {
                    foot: *center + dir * *radius,
                    distance: (radius - r).abs(),
                    approximate: false,
                    ambiguous: r == 0.0,
                }
            }
            DomainGeometry::Wedge { slope, .. } => wedge_projection(*slope, x),
            DomainGeometry::Graph(g) => {
                let p = g.project(x);
                Projection { foot: p.foot, distance: p.distance, approximate: p.approximate, ambiguous: p.ambiguous }
            }
        }
    }

    /// ξ(x) for x inside the domain within the caller's uniqueness collar.
    pub fn nearest_boundary_point(&self, x: &Point, collar: f64) -> Result<Point, GeometryError> {
        if !self.contains(x) {
            return Err(GeometryError::NotInDomain);
        }
        let p = self.project(x);
        if p.distance >= collar {
            return Err(GeometryError::OutsideCollar { distance: p.distance, collar });
        }
        if p.ambiguous {
            return Err(GeometryError::Ambiguous);
        }
        Ok(p.foot)
    }

    /// `2ξ(x) - x`.
    pub fn reflect(&self, x: &Point, collar: f64) -> Result<Point, GeometryError> {
        let xi = self.nearest_boundary_point(x, collar)?;
        Ok(xi * 2.0 - *x)
    }

    /// Unit vector from the nearest boundary point toward `x`.
    pub fn inward_normal(&self, x: &Point) -> Point {
        if let DomainGeometry::HalfSpace { dim } = self {
            return Point::axis(*dim, dim - 1);
        }
        let p = self.project(x);
        let v = *x - p.foot;
        let v = if self.contains(x) { v } else { -v };
        v.normalized().unwrap_or_else(|| Point::axis(x.dim(), x.dim() - 1))
    }

    /// Pushes every `r in (0, r_max]` with `x + r·dir` on the boundary.
    pub fn ray_crossings(&self, x: &Point, dir: &Point, r_max: f64, out: &mut Vec<f64>) {
        match self {
            DomainGeometry::HalfSpace { .. } => {
                let dn = dir.last();
                if dn != 0.0 {
                    let r = -x.last() / dn;
                    if r > 0.0 && r <= r_max {
                        out.push(r);
                    }
                }
            }
            DomainGeometry::Ball { center, radius } => {
                let d = *x - *center;
                let b = d.dot(dir);
                let c = d.norm_sq() - radius * radius;
                let disc = b * b - c;
                if disc > 0.0 {
                    let s = disc.sqrt();
                    // numerically stable pair of roots
                    let q = if b > 0.0 { -b - s } else { -b + s };
                    for r in [q, if q != 0.0 { c / q } else { 0.0 }] {
                        if r > 0.0 && r <= r_max {
                            out.push(r);
                        }
                    }
                }
            }
            DomainGeometry::Wedge { dim, slope } => {
                graph_crossings(&BoundaryGraph::cone(*dim, *slope), x, dir, r_max, out)
            }
            DomainGeometry::Graph(g) => graph_crossings(g, x, dir, r_max, out),
        }
    }

    /// The dilated domain `λ·D`.
    pub fn scaled(&self, lambda: f64) -> DomainGeometry {
        match self {
            DomainGeometry::HalfSpace { .. } | DomainGeometry::Wedge { .. } => self.clone(),
            DomainGeometry::Graph(g) => DomainGeometry::Graph(g.scaled(lambda)),
            DomainGeometry::Ball { center, radius } => {
                DomainGeometry::Ball { center: *center * lambda, radius: radius * lambda }
            }
        }
    }
}

fn wedge_distance(slope: f64, x: &Point) -> f64 {
    let u = x.tilde_norm();
    let v = x.last();
    let k = (1.0 + slope * slope).sqrt();
    // nearest generator lies in the meridian half-plane of x
    let t = (u + slope * v) / k;
    let near = if t >= 0.0 { (v - slope * u).abs() / k } else { (u * u + v * v).sqrt() };
    let t2 = (-u + slope * v) / k;
    let far = if t2 >= 0.0 { (v + slope * u).abs() / k } else { (u * u + v * v).sqrt() };
    near.min(far)
}

fn wedge_projection(slope: f64, x: &Point) -> Projection {
    let n = x.dim();
    let u = x.tilde_norm();
    let v = x.last();
    let k2 = 1.0 + slope * slope;
    let t = (u + slope * v) / k2;
    let distance = wedge_distance(slope, x);
    let (foot, ambiguous) = if t <= 0.0 {
        (Point::zeros(n), false)
    } else if u > 0.0 {
        let scale = t / u;
        let tilde: Vec<f64> = x.tilde().iter().map(|c| c * scale).collect();
        (Point::from_parts(&tilde, slope * t), false)
    } else {
        // on the axis every generator is equally near
        let mut tilde = vec![0.0; n - 1];
        tilde[0] = t;
        (Point::from_parts(&tilde, slope * t), true)
    };
    Projection { foot, distance, approximate: false, ambiguous }
}

fn graph_crossings(g: &BoundaryGraph, x: &Point, dir: &Point, r_max: f64, out: &mut Vec<f64>) {
    let k = g.dim() - 1;
    let gap = |r: f64| {
        let mut s = [0.0; 2];
        for i in 0..k {
            s[i] = x[i] + r * dir[i];
        }
        x.last() + r * dir.last() - g.value(&s[..k])
    };
    if g.is_convex() {
        // gap is concave in r: locate its maximum, then at most one root per side
        let (mut lo, mut hi) = (0.0, r_max);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = hi - phi * (hi - lo);
        let mut b = lo + phi * (hi - lo);
        let (mut fa, mut fb) = (gap(a), gap(b));
        for _ in 0..90 {
            if fa < fb {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = gap(b);
            } else {
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = gap(a);
            }
        }
        let (g0, gm) = (gap(0.0), gap(r_max));
        let (mut peak, mut gpeak) = if fa > fb { (a, fa) } else { (b, fb) };
        if g0 > gpeak {
            peak = 0.0;
            gpeak = g0;
        }
        if gpeak <= 0.0 {
            return;
        }
        if g0 < 0.0 {
            out.push(bisect(&gap, 0.0, peak));
        }
        if gm < 0.0 {
            out.push(bisect(&gap, peak, r_max));
        }
    } else {
        let m = 4000;
        let r0 = r_max * 1e-12;
        let ratio = (r_max / r0).powf(1.0 / m as f64);
        let (mut ra, mut ga) = (0.0, gap(0.0));
        let mut rb = r0;
        for _ in 0..=m {
            let gb = gap(rb);
            if (ga > 0.0) != (gb > 0.0) {
                out.push(bisect(&gap, ra, rb));
            }
            ra = rb;
            ga = gb;
            rb *= ratio;
        }
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let pos_lo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == pos_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
