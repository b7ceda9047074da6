//! Jump-density factors κ(x,y) and sampled checks of the regularity classes
//! they are assumed to satisfy.

use std::fmt;
use std::sync::Arc;

use crate::geometry::{DomainGeometry, Point};

pub type PairFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Form {
    Constant(f64),
    /// `ψ₁ + ψ₂·ratio` with constant ψ's, ratio = (|x-y|/|x-ȳ|)^{n+α} for the
    /// half-space reflection ȳ = (ỹ, -y_n).
    HalfSpaceReflection { exponent: f64, psi1: f64, psi2: f64 },
    /// Σ_{|k|<=K} |x-y|^{1+α}/|x±y+2k|^{1+α} on (0, 1).
    IntervalPeriodic { alpha: f64, truncation: i64 },
    Custom(PairFn),
}

/// Regularity class [C₁, C₂, C₃, γ]: C₁ < κ < C₂ and
/// |κ(x,y) - κ(x,x)| < C₃ (ρ(x)^γ ∨ 1) |x-y|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionClass {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma: f64,
}

/// Decomposition κ ≈ ψ₁ + ψ₂·(|x-y|/|x-ȳ|)^{n+α} near the boundary.
#[derive(Clone)]
pub struct CompositeParts {
    pub psi1: PairFn,
    pub psi2: PairFn,
    pub c_prime: f64,
    pub delta: f64,
}

impl fmt::Debug for CompositeParts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompositeParts {{ c_prime: {}, delta: {} }}", self.c_prime, self.delta)
    }
}

/// A symmetric kernel with declared bounds. Arguments are put in a canonical
/// order before evaluation, so `eval(x, y) == eval(y, x)` bit for bit.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    form: Form,
    lower: f64,
    upper: f64,
    class: Option<ConditionClass>,
    composite: Option<CompositeParts>,
    tail_bound: f64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("class", &self.class)
            .field("composite", &self.composite)
            .finish()
    }
}

fn ratio_pow(x: &Point, y: &Point, exponent: f64) -> f64 {
    let n = x.dim();
    let mut num = 0.0;
    for i in 0..n {
        num += (x[i] - y[i]) * (x[i] - y[i]);
    }
    if num == 0.0 {
        return 0.0;
    }
    let s = x.last() + y.last();
    let den = num - (x.last() - y.last()).powi(2) + s * s;
    (num / den).powf(0.5 * exponent)
}

fn periodic_sum(x: f64, y: f64, alpha: f64, truncation: i64) -> f64 {
    let d = (x - y).abs();
    if d == 0.0 {
        return 1.0;
    }
    let e = -(1.0 + alpha);
    let mut acc = 0.0;
    for k in -truncation..=truncation {
        let shift = 2.0 * k as f64;
        let minus = (x - y + shift).abs();
        let plus = (x + y + shift).abs();
        acc += (minus / d).powf(e) + (plus / d).powf(e);
    }
    acc
}

impl Kernel {
    /// κ ≡ c.
    pub fn constant(c: f64) -> Kernel {
        assert!(c > 0.0);
        Kernel {
            name: format!("constant({c})"),
            form: Form::Constant(c),
            lower: c,
            upper: c,
            class: Some(ConditionClass { c1: c, c2: c, c3: 0.0, gamma: 0.0 }),
            composite: Some(CompositeParts {
                psi1: Arc::new(move |_, _| c),
                psi2: Arc::new(|_, _| 0.0),
                c_prime: 0.0,
                delta: f64::INFINITY,
            }),
            tail_bound: 0.0,
        }
    }

    /// `1 + |x-y|^{n+α}/|x-ȳ|^{n+α}` on the half-space: the jump factor of the
    /// subordinate reflected Brownian motion. Takes values in [1, 2).
    pub fn halfspace_subordinate(n: usize, alpha: f64) -> Kernel {
        let exponent = n as f64 + alpha;
        Kernel {
            name: format!("halfspace-subordinate(n={n}, alpha={alpha})"),
            form: Form::HalfSpaceReflection { exponent, psi1: 1.0, psi2: 1.0 },
            lower: 1.0,
            upper: 2.0,
            class: Some(ConditionClass { c1: 1.0, c2: 2.0, c3: 1.0, gamma: -1.0 }),
            composite: Some(CompositeParts {
                psi1: Arc::new(|_, _| 1.0),
                psi2: Arc::new(|_, _| 1.0),
                c_prime: 0.0,
                delta: f64::INFINITY,
            }),
            tail_bound: 0.0,
        }
    }

    /// The reflection ratio `|x-y|^{n+α}/|x-ȳ|^{n+α}` alone. It vanishes on the
    /// diagonal, so it is a building block rather than a member of any class.
    pub fn halfspace_reflection_ratio(n: usize, alpha: f64) -> Kernel {
        let exponent = n as f64 + alpha;
        Kernel {
            name: format!("halfspace-ratio(n={n}, alpha={alpha})"),
            form: Form::HalfSpaceReflection { exponent, psi1: 0.0, psi2: 1.0 },
            lower: 0.0,
            upper: 1.0,
            class: None,
            composite: Some(CompositeParts {
                psi1: Arc::new(|_, _| 0.0),
                psi2: Arc::new(|_, _| 1.0),
                c_prime: 0.0,
                delta: f64::INFINITY,
            }),
            tail_bound: 0.0,
        }
    }

    /// Periodized reflection kernel on (0, 1), truncated to |k| <= K.
    pub fn interval_periodic(alpha: f64, truncation: usize) -> Kernel {
        let tail = periodic_tail_bound(alpha, truncation);
        // each family with |k| >= 1 is bounded by Σ_j (2j-1)^{-1-α}; k = 0 terms and
        // the k = -1 "+" term are at most 1
        let series: f64 = (1..100_000).map(|j| (2.0 * j as f64 - 1.0).powf(-1.0 - alpha)).sum::<f64>()
            + (2.0e5f64 - 1.0).powf(-alpha) / (2.0 * alpha);
        let upper = 3.0 + 3.0 * series + tail;
        Kernel {
            name: format!("interval-periodic(alpha={alpha}, K={truncation})"),
            form: Form::IntervalPeriodic { alpha, truncation: truncation as i64 },
            lower: 1.0,
            upper,
            class: None,
            composite: None,
            tail_bound: tail,
        }
    }

    /// Arbitrary symmetric kernel. `f` need not be symmetric itself; the
    /// canonical argument order makes the evaluation symmetric.
    pub fn custom(name: &str, f: PairFn, lower: f64, upper: f64) -> Kernel {
        Kernel {
            name: name.to_string(),
            form: Form::Custom(f),
            lower,
            upper,
            class: None,
            composite: None,
            tail_bound: 0.0,
        }
    }

    pub fn with_class(mut self, class: ConditionClass) -> Kernel {
        self.class = Some(class);
        self
    }

    pub fn with_composite(mut self, parts: CompositeParts) -> Kernel {
        self.composite = Some(parts);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn class(&self) -> Option<ConditionClass> {
        self.class
    }

    pub fn composite(&self) -> Option<&CompositeParts> {
        self.composite.as_ref()
    }

    /// Bound on the truncated remainder of a series kernel (0 otherwise).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.form {
            Form::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        let (a, b) = if x.coords() <= y.coords() { (x, y) } else { (y, x) };
        match &self.form {
            Form::Constant(c) => *c,
            Form::HalfSpaceReflection { exponent, psi1, psi2 } => psi1 + psi2 * ratio_pow(a, b, *exponent),
            Form::IntervalPeriodic { alpha, truncation } => periodic_sum(a[0], b[0], *alpha, *truncation),
            Form::Custom(f) => f(a, b),
        }
    }
}

/// Rigorous bound on Σ_{|k|>K} of the periodic series for x, y in (0, 1):
/// 4·[(2K)^{-1-α} + (2K)^{-α}/(2α)].
pub fn periodic_tail_bound(alpha: f64, truncation: usize) -> f64 {
    let t = 2.0 * truncation.max(1) as f64;
    4.0 * (t.powf(-1.0 - alpha) + t.powf(-alpha) / (2.0 * alpha))
}

/// Quasi-random pair sampler over a bounded window of a domain. Separations
/// are log-uniform over `[min_sep, max_sep]` so both tiny and macroscopic
/// pairs are probed.
#[derive(Debug, Clone, Copy)]
pub struct PairSampler {
    pub count: usize,
    /// Lateral half-width of the window (graph-like domains).
    pub half_width: f64,
    /// Height range of the window (graph-like domains).
    pub max_height: f64,
    pub min_sep: f64,
    pub max_sep: f64,
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler { count: 20_000, half_width: 1.0, max_height: 1.0, min_sep: 1e-8, max_sep: 1.0 }
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

impl PairSampler {
    /// The i-th point in the window, with coordinate `height_window` mapping
    /// the unit interval onto the admissible heights.
    fn point(&self, dom: &DomainGeometry, i: u64, height: (f64, f64)) -> Option<Point> {
        let n = dom.dim();
        let u: Vec<f64> = (0..n).map(|k| halton(i + 1, PRIMES[k])).collect();
        let p = match dom {
            DomainGeometry::Ball { center, radius } => {
                let mut c = vec![0.0; n];
                for k in 0..n {
                    c[k] = center[k] + radius * (2.0 * u[k] - 1.0);
                }
                Point::new(&c)
            }
            _ => {
                let tilde: Vec<f64> = (0..n - 1).map(|k| self.half_width * (2.0 * u[k] - 1.0)).collect();
                let g = dom.as_graph().expect("graph-like domain");
                // log-uniform heights resolve the boundary layer
                let h = (height.0.ln() + (height.1.ln() - height.0.ln()) * u[n - 1]).exp();
                Point::from_parts(&tilde, g.value(&tilde) + h)
            }
        };
        let rho = dom.distance(&p);
        (dom.contains(&p) && rho > height.0 && rho < height.1).then_some(p)
    }

    fn partner(&self, dom: &DomainGeometry, x: &Point, i: u64) -> Option<Point> {
        let n = dom.dim();
        let us = halton(i + 1, PRIMES[n]);
        let sep = (self.min_sep.ln() + (self.max_sep.ln() - self.min_sep.ln()) * us).exp();
        let mut dir = vec![0.0; n];
        // Box–Muller-free direction: normalize a quasi-random cube point
        for k in 0..n {
            dir[k] = 2.0 * halton(i + 1, PRIMES[n + 1 + k]) - 1.0;
        }
        let d = Point::new(&dir).normalized()?;
        let y = *x + d * sep;
        dom.contains(&y).then_some(y)
    }

    /// Pairs with ρ(x) in `rho_range`.
    pub fn pairs(&self, dom: &DomainGeometry, rho_range: (f64, f64)) -> Vec<(Point, Point)> {
        let mut out = Vec::with_capacity(self.count);
        let lo = rho_range.0.max(1e-9);
        let hi = rho_range.1.min(self.max_height);
        let mut i = 0u64;
        while out.len() < self.count && i < 20 * self.count as u64 {
            if let Some(x) = self.point(dom, i, (lo, hi)) {
                if let Some(y) = self.partner(dom, &x, i) {
                    out.push((x, y));
                }
            }
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub pairs: usize,
    pub min_value: f64,
    pub max_value: f64,
    pub bounds_ok: bool,
    /// max |κ(x,y)-κ(x,x)| / ((ρ(x)^γ ∨ 1)|x-y|); the class needs this below C₃.
    pub worst_increment_ratio: f64,
    pub worst_pair: Option<(Point, Point)>,
    pub passed: bool,
}

/// Sampled check of class [C₁, C₂, C₃, γ]. Certifies only the sampled pairs.
pub fn check_condition_class(
    kernel: &Kernel,
    dom: &DomainGeometry,
    sampler: &PairSampler,
    class: &ConditionClass,
) -> ConditionReport {
    let pairs = sampler.pairs(dom, (0.0, f64::INFINITY));
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut worst = 0.0;
    let mut worst_pair = None;
    for (x, y) in &pairs {
        let k = kernel.eval(x, y);
        min_value = min_value.min(k);
        max_value = max_value.max(k);
        let rho = dom.distance(x);
        let scale = rho.powf(class.gamma).max(1.0) * x.dist(y);
        let q = (k - kernel.eval(x, x)).abs() / scale;
        if q > worst {
            worst = q;
            worst_pair = Some((*x, *y));
        }
    }
    // strict bounds are not resolvable in floating point (1 + 1e-28 == 1), so
    // the sampled check uses the closed bounds
    let bounds_ok = min_value >= class.c1 && max_value <= class.c2;
    ConditionReport {
        pairs: pairs.len(),
        min_value,
        max_value,
        bounds_ok,
        worst_increment_ratio: worst,
        worst_pair,
        passed: bounds_ok && worst <= class.c3,
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryFormReport {
    pub collar_pairs: usize,
    pub interior_pairs: usize,
    /// max over collar pairs of |κ - ψ₁ - ψ₂·ratio| - C'|x-y|; pass needs <= 0.
    pub worst_collar_excess: f64,
    pub worst_collar_pair: Option<(Point, Point)>,
    /// max over interior pairs of |κ(x,y)-κ(x,x)| - C'|x-y|.
    pub worst_interior_excess: f64,
    /// C' + sampled sup of |∇_y ψ₁| + |∇_y ψ₂| over pairs with |x-y| < 1.
    pub m_constant: f64,
    pub passed: bool,
}

/// Sampled check of the boundary decomposition on the half-space collar
/// {ρ < δ} and the interior increment bound on {ρ > δ/2}.
pub fn check_boundary_form(
    kernel: &Kernel,
    psi1: &dyn Fn(&Point, &Point) -> f64,
    psi2: &dyn Fn(&Point, &Point) -> f64,
    n: usize,
    alpha: f64,
    c_prime: f64,
    delta: f64,
    sampler: &PairSampler,
) -> BoundaryFormReport {
    let dom = DomainGeometry::half_space(n);
    let exponent = n as f64 + alpha;
    // roundoff allowance for identities that hold exactly
    let slack = 1e-12;
    let collar = sampler.pairs(&dom, (0.0, delta));
    let mut worst_collar = f64::NEG_INFINITY;
    let mut worst_collar_pair = None;
    let mut grad_sup: f64 = 0.0;
    for (x, y) in &collar {
        let form = psi1(x, y) + psi2(x, y) * ratio_pow(x, y, exponent);
        let excess = (kernel.eval(x, y) - form).abs() - c_prime * x.dist(y) - slack;
        if excess > worst_collar {
            worst_collar = excess;
            worst_collar_pair = Some((*x, *y));
        }
        if x.dist(y) < 1.0 {
            grad_sup = grad_sup.max(fd_gradient_norm(psi1, x, y) + fd_gradient_norm(psi2, x, y));
        }
    }
    let interior = sampler.pairs(&dom, (0.5 * delta, f64::INFINITY));
    let mut worst_interior = f64::NEG_INFINITY;
    for (x, y) in &interior {
        let excess = (kernel.eval(x, y) - kernel.eval(x, x)).abs() - c_prime * x.dist(y) - slack;
        worst_interior = worst_interior.max(excess);
    }
    BoundaryFormReport {
        collar_pairs: collar.len(),
        interior_pairs: interior.len(),
        worst_collar_excess: worst_collar,
        worst_collar_pair,
        worst_interior_excess: worst_interior,
        m_constant: c_prime + grad_sup,
        passed: worst_collar <= 0.0 && worst_interior <= 0.0,
    }
}

fn fd_gradient_norm(f: &dyn Fn(&Point, &Point) -> f64, x: &Point, y: &Point) -> f64 {
    let h = 1e-6 * (1.0 + y.norm());
    let mut s = 0.0;
    for i in 0..y.dim() {
        let mut yp = *y;
        let mut ym = *y;
        yp.set(i, y[i] + h);
        ym.set(i, y[i] - h);
        let d = (f(x, &yp) - f(x, &ym)) / (2.0 * h);
        s += d * d;
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    fn small_sampler() -> PairSampler {
        PairSampler { count: 4000, ..Default::default() }
    }

    #[test]
    fn constant_kernel() {
        let k = Kernel::constant(1.0);
        assert_eq!(k.eval(&p(&[0.0, 1.0]), &p(&[2.0, 3.0])), 1.0);
        let class = ConditionClass { c1: 0.5, c2: 2.0, c3: 1e-3, gamma: -1.0 };
        let r = check_condition_class(&k, &DomainGeometry::half_space(2), &small_sampler(), &class);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn subordinate_kernel_values() {
        let k = Kernel::halfspace_subordinate(2, 1.5);
        let x = p(&[0.3, 0.4]);
        assert_eq!(k.eval(&x, &x), 1.0);
        let k1 = Kernel::halfspace_subordinate(1, 1.0);
        assert!((k1.eval(&p(&[1.0]), &p(&[2.0])) - 10.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn subordinate_kernel_reflection_route() {
        // same value through the geometry reflection ȳ = 2ξ(y) - y
        let dom = DomainGeometry::half_space(3);
        let k = Kernel::halfspace_subordinate(3, 1.3);
        let (x, y) = (p(&[0.1, -0.4, 0.7]), p(&[0.5, 0.2, 0.05]));
        let yb = dom.reflect(&y, 1.0).unwrap();
        let direct = 1.0 + (x.dist(&y) / x.dist(&yb)).powf(4.3);
        assert!((k.eval(&x, &y) - direct).abs() < 1e-14);
    }

    #[test]
    fn subordinate_kernel_in_class() {
        let k = Kernel::halfspace_subordinate(2, 1.5);
        let class = ConditionClass { c1: 1.0, c2: 2.0, c3: 1.5, gamma: -1.0 };
        let r = check_condition_class(&k, &DomainGeometry::half_space(2), &small_sampler(), &class);
        assert!(r.passed, "{r:?}");
        assert!(r.min_value >= 1.0 && r.max_value <= 2.0);
    }

    #[test]
    fn subordinate_kernel_boundary_limits() {
        let k = Kernel::halfspace_subordinate(2, 1.5);
        // separation fixed, points sink toward the boundary: κ → 2
        let mut last = 1.0;
        for j in 1..12 {
            let t = 10f64.powi(-j);
            let v = k.eval(&p(&[0.0, t]), &p(&[0.1, t]));
            assert!(v >= last && v <= 2.0);
            last = v;
        }
        assert!(2.0 - last < 1e-8);
        // separation shrinking faster than the distance: κ → 1
        let v = k.eval(&p(&[0.0, 1e-3]), &p(&[1e-9, 1e-3]));
        assert!(v - 1.0 < 1e-15);
    }

    #[test]
    fn periodic_kernel_tail_and_bounds() {
        let alpha = 1.5;
        let bound = periodic_tail_bound(alpha, 50);
        assert!(bound < 1e-2);
        let k50 = Kernel::interval_periodic(alpha, 50);
        let k_ref = Kernel::interval_periodic(alpha, 20_000);
        for (x, y) in [(0.1, 0.9), (0.5, 0.52), (0.01, 0.99), (0.3, 0.7)] {
            let (a, b) = (p(&[x]), p(&[y]));
            let v = k50.eval(&a, &b);
            let r = k_ref.eval(&a, &b);
            assert!(r - v >= 0.0 && r - v <= bound, "tail {} > {bound}", r - v);
            assert!(v >= 1.0 && v <= k50.upper());
            assert_eq!(v, k50.eval(&b, &a));
        }
    }

    #[test]
    fn oscillating_kernel_fails_increment_bound() {
        let k = Kernel::custom(
            "oscillating",
            Arc::new(|x: &Point, y: &Point| 2.0 + (1e6 * (x[0] - y[0]).abs()).sin()),
            1.0,
            3.0,
        );
        let class = ConditionClass { c1: 0.5, c2: 3.5, c3: 10.0, gamma: 0.0 };
        let r = check_condition_class(&k, &DomainGeometry::half_space(2), &small_sampler(), &class);
        assert!(!r.passed);
        assert!(r.worst_increment_ratio > 1e4);
    }

    #[test]
    fn boundary_form_checks() {
        let s = small_sampler();
        let one = |_: &Point, _: &Point| 1.0;
        let zero = |_: &Point, _: &Point| 0.0;
        let sub = Kernel::halfspace_subordinate(2, 1.5);
        let r = check_boundary_form(&sub, &one, &one, 2, 1.5, 0.0, 0.2, &s);
        assert!(r.worst_collar_excess <= 0.0, "{r:?}");
        // interior increments of the subordinate kernel are not Lipschitz with C'=0
        let c = Kernel::constant(1.0);
        let r = check_boundary_form(&c, &one, &zero, 2, 1.5, 0.0, 0.2, &s);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.m_constant, 0.0);
        let r = check_boundary_form(&c, &zero, &one, 2, 1.5, 1.0, 0.2, &s);
        assert!(!r.passed);
        assert!(r.worst_collar_excess > 0.5);
    }

    proptest! {
        #[test]
        fn kernels_are_exactly_symmetric(a in -2.0f64..2.0, b in 0.001f64..2.0, c in -2.0f64..2.0, d in 0.001f64..2.0) {
            let (x, y) = (p(&[a, b]), p(&[c, d]));
            let ks = [
                Kernel::constant(1.3),
                Kernel::halfspace_subordinate(2, 1.5),
                Kernel::halfspace_reflection_ratio(2, 1.2),
                Kernel::custom("skew", Arc::new(|x: &Point, y: &Point| 1.0 + (x[0] - 2.0 * y[1]).sin().abs()), 1.0, 2.0),
            ];
            for k in &ks {
                prop_assert_eq!(k.eval(&x, &y), k.eval(&y, &x));
            }
            let per = Kernel::interval_periodic(1.5, 30);
            let (u, v) = (p(&[b / 2.01]), p(&[d / 2.01]));
            prop_assert_eq!(per.eval(&u, &v), per.eval(&v, &u));
        }

        #[test]
        fn subordinate_kernel_bounds(a in -2.0f64..2.0, b in 1e-6f64..2.0, c in -2.0f64..2.0, d in 1e-6f64..2.0) {
            let k = Kernel::halfspace_subordinate(2, 1.5);
            let v = k.eval(&p(&[a, b]), &p(&[c, d]));
            prop_assert!((1.0..=2.0).contains(&v));
        }
    }
}
