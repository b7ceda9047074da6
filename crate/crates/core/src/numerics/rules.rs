use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights on a reference interval: `[-1, 1]` for Gauss–Legendre,
/// `[0, 1]` for the Jacobi rules. Jacobi weights already divide out `s^e`, so
/// every rule is applied to the raw integrand.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Behaviour of the integrand at one end of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Regular,
    /// Integrand behaves like `dist^e` (e > -1); the interval is graded toward
    /// this end and the innermost cell uses a Jacobi rule with that exponent.
    Singular(f64),
}

/// Refinement parameters for composite rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedParams {
    pub order: usize,
    /// Number of dyadic cells toward a singular endpoint.
    pub depth: usize,
    /// Uniform panels when both ends are regular.
    pub panels: usize,
}

impl GradedParams {
    pub fn at_level(level: usize) -> Self {
        GradedParams {
            order: 8 + 4 * level,
            depth: 10 + 5 * level,
            panels: 1 << level,
        }
    }
}

type Cache = Mutex<HashMap<(usize, u64), Arc<UnitRule>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(m: usize, key: u64, build: impl FnOnce() -> UnitRule) -> Arc<UnitRule> {
    let mut map = cache().lock().expect("rule cache poisoned");
    map.entry((m, key)).or_insert_with(|| Arc::new(build())).clone()
}

// NaN bits never collide with a real exponent key.
const LEGENDRE_KEY: u64 = 0x7ff8_dead_beef_0001;

/// m-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> Arc<UnitRule> {
    cached(m, LEGENDRE_KEY, || build_legendre(m))
}

/// m-point Gauss–Jacobi rule for `∫_0^1 s^e g(s) ds`, weights divided by `s^e`.
pub fn gauss_jacobi(m: usize, e: f64) -> Arc<UnitRule> {
    assert!(e > -1.0, "Jacobi exponent must exceed -1");
    cached(m, e.to_bits(), || build_jacobi(m, e))
}

fn build_legendre(m: usize) -> UnitRule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    UnitRule { nodes, weights }
}

fn build_jacobi(m: usize, e: f64) -> UnitRule {
    // Golub–Welsch for Jacobi weight (1-x)^0 (1+x)^e on [-1, 1].
    let (a, b) = (0.0, e);
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jac[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < m {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            let s = 0.5 * (1.0 + x);
            // ∫_0^1 s^e ds = 1/(e+1) is the zeroth moment on [0,1]
            let w = v0 * v0 / (e + 1.0);
            (s, w / s.powf(e))
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    UnitRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

fn gl_cell(visit: &mut impl FnMut(f64, f64), rule: &UnitRule, lo: f64, hi: f64) {
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        visit(c + h * x, w * h);
    }
}

fn graded_one_side(visit: &mut impl FnMut(f64, f64), a: f64, b: f64, e: f64, params: &GradedParams) {
    // oriented rule from a to b; cells halve toward `a`, which may lie above `b`
    let gl = gauss_legendre(params.order);
    let gj = gauss_jacobi(params.order, e);
    let len = b - a;
    let mut outer = 1.0;
    // stop grading once cells fall below ~1e-8 of |a|; nodes would round onto `a`
    let floor = a.abs() * 2f64.powi(-26);
    for _ in 0..params.depth {
        if (outer * len).abs() < floor {
            break;
        }
        let inner = 0.5 * outer;
        gl_cell(visit, &gl, a + inner * len, a + outer * len);
        outer = inner;
    }
    // h carries the sign of b - a
    let h = outer * len;
    for (s, w) in gj.nodes.iter().zip(&gj.weights) {
        visit(a + h * s, w * h);
    }
}

/// Visits the nodes and (oriented) weights of the composite rule on `[a, b]`.
pub fn graded_visit(
    visit: &mut impl FnMut(f64, f64),
    a: f64,
    b: f64,
    left: Endpoint,
    right: Endpoint,
    params: &GradedParams,
) {
    if b == a {
        return;
    }
    match (left, right) {
        (Endpoint::Regular, Endpoint::Regular) => {
            let gl = gauss_legendre(params.order);
            let p = params.panels.max(1);
            let h = (b - a) / p as f64;
            for i in 0..p {
                gl_cell(visit, &gl, a + h * i as f64, a + h * (i + 1) as f64);
            }
        }
        (Endpoint::Singular(e), Endpoint::Regular) => graded_one_side(visit, a, b, e, params),
        (Endpoint::Regular, Endpoint::Singular(e)) => {
            graded_one_side(&mut |x, w| visit(x, -w), b, a, e, params)
        }
        (Endpoint::Singular(e0), Endpoint::Singular(e1)) => {
            let m = 0.5 * (a + b);
            graded_one_side(visit, a, m, e0, params);
            graded_one_side(&mut |x, w| visit(x, -w), b, m, e1, params);
        }
    }
}

/// Composite Gauss sum of `f` over `[a, b]` with declared endpoint behaviour.
pub fn graded_sum(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    left: Endpoint,
    right: Endpoint,
    params: &GradedParams,
) -> f64 {
    let mut acc = 0.0;
    graded_visit(&mut |x, w| acc += w * f(x), a, b, left, right, params);
    acc
}

/// Nodes and weights of the composite rule.
pub fn graded_nodes(a: f64, b: f64, left: Endpoint, right: Endpoint, params: &GradedParams) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    graded_visit(&mut |x, w| out.push((x, w)), a, b, left, right, params);
    out
}

/// Number of integrand evaluations `graded_sum` performs.
pub fn graded_cost(left: Endpoint, right: Endpoint, params: &GradedParams) -> usize {
    let side = (params.depth + 1) * params.order;
    match (left, right) {
        (Endpoint::Regular, Endpoint::Regular) => params.panels.max(1) * params.order,
        (Endpoint::Singular(_), Endpoint::Singular(_)) => 2 * side,
        _ => side,
    }
}
