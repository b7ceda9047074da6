use proptest::prelude::*;

use super::*;
use crate::catalog::{
    c_half_space, c_half_space_reflected, lambda_killed, normalization_constant, PowerFunction,
};
use crate::geometry::BoundaryGraph;

fn half(n: usize) -> DomainGeometry {
    DomainGeometry::half_space(n)
}

fn at_height(n: usize, t: f64) -> Point {
    Point::zeros(n).with_last(t)
}

fn bump(c: Point) -> FnField<impl Fn(&Point) -> f64 + Send + Sync> {
    FnField::new(move |y: &Point| (-(y.dist(&c).powi(2))).exp())
}

#[test]
fn constant_function_maps_to_zero() {
    let u = FnField::new(|_: &Point| 3.5);
    let dom = half(2);
    let k = Kernel::constant(1.0);
    let p = OperatorProblem::new(&u, &dom, &k, 1.5);
    let r = regional_pv(&p, &at_height(2, 0.3)).unwrap();
    assert_eq!(r.value, 0.0);
    assert!(r.converged);
}

#[test]
fn harmonic_power_is_annihilated() {
    let k = Kernel::constant(1.0);
    for n in [2, 3] {
        let dom = half(n);
        let w = PowerFunction::half_space(n, 0.5);
        let p = OperatorProblem::new(&w, &dom, &k, 1.5);
        for t in [0.1, 1.0] {
            let r = regional_pv(&p, &at_height(n, t)).unwrap();
            assert!(r.value.abs() < 1e-6, "n={n} t={t}: {}", r.value);
        }
    }
}

#[test]
fn half_space_power_image() {
    let k = Kernel::constant(1.0);
    let dom = half(2);
    for (alpha, p) in [(1.2, 0.3), (1.5, 1.4), (1.8, 1.3), (0.7, 0.2)] {
        let w = PowerFunction::half_space(2, p);
        let prob = OperatorProblem::new(&w, &dom, &k, alpha);
        for t in [1.0, 0.25] {
            let r = regional_pv(&prob, &at_height(2, t)).unwrap();
            let expected = c_half_space(2, alpha, p).unwrap() * t.powf(p - alpha);
            assert!(((r.value - expected) / expected).abs() < 1e-4, "a={alpha} p={p} t={t}: {} vs {expected}", r.value);
            assert!(r.converged);
        }
    }
}

#[test]
fn reflection_ratio_kernel_image() {
    let dom = half(2);
    let k = Kernel::halfspace_reflection_ratio(2, 1.5);
    for p in [1.2, -0.5, 0.9] {
        let w = PowerFunction::half_space(2, p);
        let r = regional_pv(&OperatorProblem::new(&w, &dom, &k, 1.5), &at_height(2, 1.0)).unwrap();
        let expected = c_half_space_reflected(2, 1.5, p).unwrap();
        assert!(((r.value - expected) / expected).abs() < 1e-3, "p={p}");
    }
}

#[test]
fn full_space_images() {
    let dom = half(2);
    let q = QuadratureSpec::new(1e-7, 1e-6);
    let w = PowerFunction::half_space(2, 0.75);
    let r = fullspace_pv(&w, &dom, &at_height(2, 1.0), 1.5, &q).unwrap();
    assert!(r.value.abs() < 1e-6, "{}", r.value);
    for p in [0.3, 1.1] {
        let w = PowerFunction::half_space(2, p);
        let r = fullspace_pv(&w, &dom, &at_height(2, 1.0), 1.5, &q).unwrap();
        let expected = lambda_killed(2, 1.5, p).unwrap();
        assert!(((r.value - expected) / expected).abs() < 1e-4);
        assert_eq!(r.value.signum(), (p - 0.75).signum());
    }
    // singular at the boundary: the image comes from the regional one
    let w = PowerFunction::half_space(2, -0.3);
    let r = fullspace_pv(&w, &dom, &at_height(2, 1.0), 1.5, &q).unwrap();
    let expected = lambda_killed(2, 1.5, -0.3).unwrap();
    assert!(((r.value - expected) / expected).abs() < 1e-4, "{} vs {expected}", r.value);
}

#[test]
fn out_of_domain_and_bad_alpha_are_rejected() {
    let u = FnField::new(|_: &Point| 1.0);
    let dom = half(2);
    let k = Kernel::constant(1.0);
    assert_eq!(
        regional_pv(&OperatorProblem::new(&u, &dom, &k, 1.5), &at_height(2, -1.0)).unwrap_err(),
        OperatorError::NotInDomain
    );
    assert_eq!(
        regional_pv(&OperatorProblem::new(&u, &dom, &k, 2.0), &at_height(2, 1.0)).unwrap_err(),
        OperatorError::InvalidAlpha(2.0)
    );
}

#[test]
fn epsilon_trace_is_ordered_and_settles() {
    let u = bump(Point::new(&[0.3, 1.2]));
    let dom = half(2);
    let k = Kernel::constant(1.0);
    let r = regional_pv(&OperatorProblem::new(&u, &dom, &k, 1.5), &at_height(2, 0.8)).unwrap();
    assert_eq!(r.epsilon_trace.len(), DEFAULT_SWEEP_LEVELS);
    assert!(r.epsilon_trace.windows(2).all(|w| w[1].0 < w[0].0));
    assert_eq!(r.verdict, SweepVerdict::Convergent);
    let first = r.epsilon_trace[0].1;
    let last = r.epsilon_trace.last().unwrap().1;
    assert!((last - r.value).abs() < 0.05 * (first - r.value).abs(), "{first} {last} {}", r.value);
}

#[test]
fn verdicts_on_model_sequences() {
    let geometric: Vec<f64> = (0..12).map(|k| 1.0 - 0.5f64.powi(k)).collect();
    assert_eq!(sweep_verdict(&geometric), SweepVerdict::Convergent);
    let slow_geometric: Vec<f64> = (0..12).map(|k| 1.0 - 0.9f64.powi(k)).collect();
    assert_eq!(sweep_verdict(&slow_geometric), SweepVerdict::Convergent);
    let harmonic: Vec<f64> = (1..13).scan(0.0, |s, k| {
        *s += 1.0 / k as f64;
        Some(*s)
    }).collect();
    assert_eq!(sweep_verdict(&harmonic), SweepVerdict::DivergentPositive);
    let log_down: Vec<f64> = (0..12).map(|k| -(k as f64)).collect();
    assert_eq!(sweep_verdict(&log_down), SweepVerdict::DivergentNegative);
    let flat = vec![2.0; 12];
    assert_eq!(sweep_verdict(&flat), SweepVerdict::Convergent);
    let alternating: Vec<f64> = (0..12).map(|k| if k % 2 == 0 { 1.0 } else { 1.1 }).collect();
    assert_eq!(sweep_verdict(&alternating), SweepVerdict::Convergent);
}

#[test]
fn cusp_at_critical_order_diverges_and_smoother_boundary_does_not() {
    let alpha = 1.5;
    let k = Kernel::constant(1.0);
    let x = Point::new(&[0.0, 0.05]);
    for (beta, expect) in [(alpha, SweepVerdict::DivergentNegative), (1.9, SweepVerdict::Convergent)] {
        let g = BoundaryGraph::power(2, 1.0, beta);
        let dom = DomainGeometry::graph(g.clone());
        let h = PowerFunction::graph_height(g, alpha - 1.0);
        let p = OperatorProblem::new(&h, &dom, &k, alpha);
        let schedule = default_schedule(dom.distance(&x), DEFAULT_SWEEP_LEVELS);
        let r = epsilon_sweep(&p, &x, &schedule).unwrap();
        assert_eq!(r.verdict, expect, "beta={beta}");
    }
}

#[test]
fn commutator_parts_for_constant_kernel() {
    let u = bump(Point::new(&[0.0, 1.0]));
    let dom = half(2);
    let k = Kernel::constant(1.0);
    let p = OperatorProblem::new(&u, &dom, &k, 1.5);
    let x = at_height(2, 0.5);
    let (inh, hom) = commutator_split(&p, &x).unwrap();
    assert_eq!(inh.value, 0.0);
    let direct = regional_pv(&p, &x).unwrap();
    assert!((hom.value - direct.value).abs() <= 1e-12 * direct.value.abs());
}

#[test]
fn commutator_parts_sum_to_operator() {
    let dom = half(2);
    let k = Kernel::halfspace_subordinate(2, 1.5);
    for (c, x) in [([0.2, 0.9], [0.0, 0.4]), ([-0.5, 0.3], [0.1, 1.1]), ([0.0, 2.0], [0.7, 0.6])] {
        let u = bump(Point::new(&c));
        let p = OperatorProblem::new(&u, &dom, &k, 1.5);
        let x = Point::new(&x);
        let (inh, hom) = commutator_split(&p, &x).unwrap();
        let direct = regional_pv(&p, &x).unwrap();
        let budget = 2.0 * (inh.error_estimate + hom.error_estimate + direct.error_estimate) + 1e-7;
        assert!((inh.value + hom.value - direct.value).abs() <= budget, "{} + {} vs {}", inh.value, hom.value, direct.value);
    }
}

#[test]
fn homogeneous_part_factorizes() {
    let dom = half(2);
    let lip = Kernel::custom("lipschitz", std::sync::Arc::new(|x: &Point, y: &Point| 1.0 + 0.1 * (x.dist(y)).min(1.0)), 1.0, 1.1);
    let one = Kernel::constant(1.0);
    let u = bump(Point::new(&[0.0, 1.0]));
    let x = at_height(2, 0.7);
    let (_, hom) = commutator_split(&OperatorProblem::new(&u, &dom, &lip, 1.5), &x).unwrap();
    let plain = regional_pv(&OperatorProblem::new(&u, &dom, &one, 1.5), &x).unwrap();
    assert!((hom.value - plain.value).abs() < 1e-12 * plain.value.abs().max(1.0));
}

#[test]
fn translation_along_the_boundary() {
    let dom = half(2);
    let k = Kernel::constant(1.0);
    let w = PowerFunction::half_space(2, 1.1);
    let p = OperatorProblem::new(&w, &dom, &k, 1.5);
    let v0 = regional_pv(&p, &Point::new(&[0.0, 0.6])).unwrap().value;
    for s in [-3.0, 0.4, 17.0] {
        let v = regional_pv(&p, &Point::new(&[s, 0.6])).unwrap().value;
        assert!(((v - v0) / v0).abs() < 1e-6);
    }
}

#[test]
fn dilation_scales_by_power_of_lambda() {
    let k = Kernel::constant(1.0);
    let ball = DomainGeometry::ball(Point::zeros(2), 1.0);
    let c = Point::new(&[0.2, -0.1]);
    let u = bump(c);
    let x = Point::new(&[0.3, 0.4]);
    let base = regional_pv(&OperatorProblem::new(&u, &ball, &k, 1.5), &x).unwrap().value;
    for lambda in [2.0, 4.0] {
        let big = ball.scaled(lambda);
        let ul = FnField::new(move |y: &Point| (-((*y * (1.0 / lambda)).dist(&c).powi(2))).exp());
        let v = regional_pv(&OperatorProblem::new(&ul, &big, &k, 1.5), &(x * lambda)).unwrap().value;
        let expected = lambda.powf(-1.5) * base;
        assert!(((v - expected) / expected).abs() < 1e-5, "lambda={lambda}: {v} vs {expected}");
    }
}

#[test]
fn cross_term_is_finite_and_positive() {
    let dom = half(2);
    let f = bump(Point::new(&[0.0, 0.5]));
    let h = PowerFunction::half_space(2, 0.8);
    let r = cross_term_integral(&f, &h, &dom, &at_height(2, 0.2), 1.5, &QuadratureSpec::new(1e-7, 1e-5)).unwrap();
    assert!(r.value > 0.0 && r.value.is_finite());
}

#[test]
fn jump_rate_of_the_whole_space() {
    let a = 1.5;
    let eps = 0.05;
    let q = QuadratureSpec::new(1e-10, 1e-8);
    let k = Kernel::constant(1.0);
    for n in [1, 2, 3] {
        let big = DomainGeometry::ball(Point::zeros(n), 1e9);
        let r = truncated_jump_rate(&k, &big, &Point::zeros(n), a, eps, &q).unwrap();
        let exact = normalization_constant(n, a).unwrap() * crate::numerics::sphere_area(n) * eps.powf(-a) / a;
        assert!(((r.value - exact) / exact).abs() < 1e-6, "n={n}: {} vs {exact}", r.value);
    }
}

#[test]
fn jump_rate_is_monotone_in_cutoff() {
    let dom = half(2);
    let k = Kernel::constant(1.0);
    let q = QuadratureSpec::new(1e-9, 1e-7);
    let x = at_height(2, 0.3);
    let rates: Vec<f64> =
        [0.01, 0.05, 0.2, 1.0].iter().map(|&e| truncated_jump_rate(&k, &dom, &x, 1.5, e, &q).unwrap().value).collect();
    assert!(rates.windows(2).all(|w| w[1] < w[0]), "{rates:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn linear_in_the_function(a in -2.0f64..2.0, b in -2.0f64..2.0, cx in -0.5f64..0.5) {
        let dom = half(2);
        let k = Kernel::constant(1.0);
        let u = bump(Point::new(&[cx, 0.7]));
        let v = PowerFunction::half_space(2, 1.2);
        let comb = Combination { terms: vec![(a, &u as &dyn ScalarField), (b, &v as &dyn ScalarField)] };
        let x = at_height(2, 0.5);
        let ru = regional_pv(&OperatorProblem::new(&u, &dom, &k, 1.5), &x).unwrap();
        let rv = regional_pv(&OperatorProblem::new(&v, &dom, &k, 1.5), &x).unwrap();
        let rc = regional_pv(&OperatorProblem::new(&comb, &dom, &k, 1.5), &x).unwrap();
        let budget = 2.0 * (a.abs() * ru.error_estimate + b.abs() * rv.error_estimate + rc.error_estimate) + 1e-6;
        prop_assert!((rc.value - a * ru.value - b * rv.value).abs() <= budget);
    }
}
