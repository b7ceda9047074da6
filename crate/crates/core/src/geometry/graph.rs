use std::fmt;
use std::sync::Arc;

use super::point::{Point, MAX_DIM};

pub type GraphValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GraphGradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Shape of a boundary graph `Γ: R^{n-1} -> R`.
#[derive(Clone)]
pub enum GraphShape {
    Zero,
    Affine { gradient: Vec<f64>, offset: f64 },
    /// `c·|s|^β`
    Power { c: f64, beta: f64 },
    /// `Λ·|s|`, the boundary of a Lipschitz wedge.
    Cone { slope: f64 },
    Custom {
        value: GraphValueFn,
        gradient: GraphGradientFn,
        /// Γ convex, so rays meet the graph at most twice.
        convex: bool,
    },
}

impl fmt::Debug for GraphShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphShape::Zero => write!(f, "Zero"),
            GraphShape::Affine { gradient, offset } => {
                write!(f, "Affine {{ gradient: {gradient:?}, offset: {offset} }}")
            }
            GraphShape::Power { c, beta } => write!(f, "Power {{ c: {c}, beta: {beta} }}"),
            GraphShape::Cone { slope } => write!(f, "Cone {{ slope: {slope} }}"),
            GraphShape::Custom { convex, .. } => write!(f, "Custom {{ convex: {convex} }}"),
        }
    }
}

/// Boundary graph with its declared regularity: Γ is C^{1,β-1} with gradient
/// Hölder seminorm `hoelder_norm`.
#[derive(Debug, Clone)]
pub struct BoundaryGraph {
    dim: usize,
    shape: GraphShape,
    hoelder_order: f64,
    hoelder_norm: f64,
}

impl BoundaryGraph {
    pub fn zero(dim: usize) -> Self {
        Self::with_shape(dim, GraphShape::Zero, 2.0, 0.0)
    }

    pub fn affine(dim: usize, gradient: Vec<f64>, offset: f64) -> Self {
        assert_eq!(gradient.len(), dim - 1);
        Self::with_shape(dim, GraphShape::Affine { gradient, offset }, 2.0, 0.0)
    }

    /// `Γ(s) = c|s|^β`; the gradient seminorm of order β-1 is `cβ·2^{2-β}`.
    pub fn power(dim: usize, c: f64, beta: f64) -> Self {
        assert!(beta > 1.0 && beta <= 2.0, "power graph needs β in (1, 2]");
        let norm = c.abs() * beta * 2f64.powf(2.0 - beta);
        Self::with_shape(dim, GraphShape::Power { c, beta }, beta, norm)
    }

    /// Lipschitz cone `Λ|s|`; not C^1 at the apex, so the Hölder data is nominal.
    pub fn cone(dim: usize, slope: f64) -> Self {
        assert!(slope > 0.0);
        Self::with_shape(dim, GraphShape::Cone { slope }, 1.0, f64::INFINITY)
    }

    pub fn custom(
        dim: usize,
        value: GraphValueFn,
        gradient: GraphGradientFn,
        hoelder_order: f64,
        hoelder_norm: f64,
        convex: bool,
    ) -> Self {
        Self::with_shape(dim, GraphShape::Custom { value, gradient, convex }, hoelder_order, hoelder_norm)
    }

    fn with_shape(dim: usize, shape: GraphShape, hoelder_order: f64, hoelder_norm: f64) -> Self {
        assert!((2..=MAX_DIM).contains(&dim), "graph domains need 2 <= n <= {MAX_DIM}");
        BoundaryGraph { dim, shape, hoelder_order, hoelder_norm }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &GraphShape {
        &self.shape
    }

    pub fn hoelder_order(&self) -> f64 {
        self.hoelder_order
    }

    pub fn hoelder_norm(&self) -> f64 {
        self.hoelder_norm
    }

    pub fn is_convex(&self) -> bool {
        match &self.shape {
            GraphShape::Zero | GraphShape::Affine { .. } | GraphShape::Cone { .. } => true,
            GraphShape::Power { c, .. } => *c >= 0.0,
            GraphShape::Custom { convex, .. } => *convex,
        }
    }

    /// Γ(0) = 0 and ∇Γ(0) = 0.
    pub fn is_normalized(&self) -> bool {
        let z = [0.0; MAX_DIM - 1];
        let s = &z[..self.dim - 1];
        let mut g = [0.0; MAX_DIM - 1];
        self.gradient(s, &mut g[..self.dim - 1]);
        self.value(s) == 0.0 && g.iter().all(|v| *v == 0.0)
    }

    pub fn value(&self, s: &[f64]) -> f64 {
        match &self.shape {
            GraphShape::Zero => 0.0,
            GraphShape::Affine { gradient, offset } => {
                offset + gradient.iter().zip(s).map(|(g, x)| g * x).sum::<f64>()
            }
            GraphShape::Power { c, beta } => c * norm(s).powf(*beta),
            GraphShape::Cone { slope } => slope * norm(s),
            GraphShape::Custom { value, .. } => value(s),
        }
    }

    pub fn gradient(&self, s: &[f64], out: &mut [f64]) {
        match &self.shape {
            GraphShape::Zero => out.fill(0.0),
            GraphShape::Affine { gradient, .. } => out.copy_from_slice(gradient),
            GraphShape::Power { c, beta } => {
                let r = norm(s);
                let f = if r > 0.0 { c * beta * r.powf(beta - 2.0) } else { 0.0 };
                for (o, x) in out.iter_mut().zip(s) {
                    *o = f * x;
                }
            }
            GraphShape::Cone { slope } => {
                let r = norm(s);
                let f = if r > 0.0 { slope / r } else { 0.0 };
                for (o, x) in out.iter_mut().zip(s) {
                    *o = f * x;
                }
            }
            GraphShape::Custom { gradient, .. } => gradient(s, out),
        }
    }

    /// Largest `|∇Γ(s)-∇Γ(t)| / |s-t|^{β-1}` over all pairs from `samples`.
    pub fn sampled_hoelder_quotient(&self, samples: &[Vec<f64>]) -> f64 {
        let k = self.dim - 1;
        let grads: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| {
                let mut g = vec![0.0; k];
                self.gradient(s, &mut g);
                g
            })
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..samples.len() {
            for j in 0..i {
                let d = dist(&samples[i], &samples[j]);
                if d > 0.0 {
                    let q = dist(&grads[i], &grads[j]) / d.powf(self.hoelder_order - 1.0);
                    worst = worst.max(q);
                }
            }
        }
        worst
    }

    /// `λ·Γ(s/λ)`, the boundary of the dilated domain `λ·D`.
    pub fn scaled(&self, lambda: f64) -> BoundaryGraph {
        let shape = match &self.shape {
            GraphShape::Zero => GraphShape::Zero,
            GraphShape::Affine { gradient, offset } => {
                GraphShape::Affine { gradient: gradient.clone(), offset: offset * lambda }
            }
            GraphShape::Power { c, beta } => GraphShape::Power { c: c * lambda.powf(1.0 - beta), beta: *beta },
            GraphShape::Cone { slope } => GraphShape::Cone { slope: *slope },
            GraphShape::Custom { value, gradient, convex } => {
                let (v, g) = (value.clone(), gradient.clone());
                GraphShape::Custom {
                    value: Arc::new(move |s: &[f64]| {
                        let t: Vec<f64> = s.iter().map(|x| x / lambda).collect();
                        lambda * v(&t)
                    }),
                    gradient: Arc::new(move |s: &[f64], out: &mut [f64]| {
                        let t: Vec<f64> = s.iter().map(|x| x / lambda).collect();
                        g(&t, out)
                    }),
                    convex: *convex,
                }
            }
        };
        let norm = self.hoelder_norm * lambda.powf(2.0 - self.hoelder_order);
        BoundaryGraph { dim: self.dim, shape, hoelder_order: self.hoelder_order, hoelder_norm: norm }
    }

    fn sq_dist(&self, x: &Point, s: &[f64]) -> f64 {
        let r = self.value(s) - x.last();
        s.iter().zip(x.tilde()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + r * r
    }

    /// Nearest point of the graph to `x`.
    pub fn project(&self, x: &Point) -> GraphProjection {
        let k = self.dim - 1;
        let xt = x.tilde();
        let h = (x.last() - self.value(xt)).abs().max(1e-3);
        let mut seeds: Vec<[f64; 2]> = Vec::with_capacity(5);
        let base = [xt[0], if k > 1 { xt[1] } else { 0.0 }];
        seeds.push(base);
        if k == 1 {
            for d in [-h, -0.5 * h, 0.5 * h, h] {
                seeds.push([base[0] + d, 0.0]);
            }
        } else {
            for (i, d) in [(0, h), (0, -h), (1, h), (1, -h)] {
                let mut s = base;
                s[i] += d;
                seeds.push(s);
            }
        }
        let mut found: Vec<([f64; 2], f64)> = Vec::new();
        for seed in seeds {
            if let Some(s) = self.gauss_newton(x, seed) {
                let d = self.sq_dist(x, &s[..k]).sqrt();
                found.push((s, d));
            }
        }
        let approximate = found.is_empty();
        if approximate {
            let s = self.grid_search(x, h);
            found.push((s, self.sq_dist(x, &s[..k]).sqrt()));
        }
        let best = found.iter().cloned().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let ambiguous = found.iter().any(|(s, d)| {
            dist(&s[..k], &best.0[..k]) > 1e-6 * (1.0 + h) && (d - best.1).abs() <= 1e-9
        });
        let s = &best.0[..k];
        GraphProjection {
            foot: Point::from_parts(s, self.value(s)),
            distance: best.1,
            approximate,
            ambiguous,
        }
    }

    fn gauss_newton(&self, x: &Point, seed: [f64; 2]) -> Option<[f64; 2]> {
        let k = self.dim - 1;
        let xt = x.tilde();
        let mut s = seed;
        let mut phi = self.sq_dist(x, &s[..k]);
        let mut g = [0.0; 2];
        for _ in 0..300 {
            self.gradient(&s[..k], &mut g[..k]);
            let r = self.value(&s[..k]) - x.last();
            let mut grad = [0.0; 2];
            for i in 0..k {
                grad[i] = (s[i] - xt[i]) + r * g[i];
            }
            // (I + g gᵀ)^{-1} via Sherman–Morrison
            let gg: f64 = g[..k].iter().map(|v| v * v).sum();
            let gd: f64 = (0..k).map(|i| g[i] * grad[i]).sum();
            let mut step = [0.0; 2];
            for i in 0..k {
                step[i] = -(grad[i] - g[i] * gd / (1.0 + gg));
            }
            let mut lam = 1.0;
            loop {
                let mut t = s;
                for i in 0..k {
                    t[i] += lam * step[i];
                }
                let pt = self.sq_dist(x, &t[..k]);
                if pt <= phi {
                    let moved = lam * norm(&step[..k]);
                    s = t;
                    phi = pt;
                    if moved <= 1e-14 * (1.0 + norm(&s[..k])) {
                        return Some(s);
                    }
                    break;
                }
                lam *= 0.5;
                if lam < 1e-12 {
                    return (norm(&grad[..k]) <= 1e-9 * (1.0 + x.norm())).then_some(s);
                }
            }
        }
        None
    }

    fn grid_search(&self, x: &Point, h: f64) -> [f64; 2] {
        let k = self.dim - 1;
        let xt = x.tilde();
        let mut center = [xt[0], if k > 1 { xt[1] } else { 0.0 }];
        let mut half = 2.0 * h;
        let m: i32 = if k == 1 { 200 } else { 40 };
        for _ in 0..12 {
            let mut best = (f64::INFINITY, center);
            for i in -m..=m {
                for j in if k == 1 { 0..=0 } else { -m..=m } {
                    let s = [
                        center[0] + half * i as f64 / m as f64,
                        center[1] + half * j as f64 / m as f64,
                    ];
                    let d = self.sq_dist(x, &s[..k]);
                    if d < best.0 {
                        best = (d, s);
                    }
                }
            }
            center = best.1;
            half *= 4.0 / m as f64;
        }
        center
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GraphProjection {
    pub foot: Point,
    pub distance: f64,
    /// Newton failed from every seed; the grid fallback was used.
    pub approximate: bool,
    /// Two distinct minimizers at equal distance.
    pub ambiguous: bool,
}

pub(crate) fn norm(s: &[f64]) -> f64 {
    s.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
