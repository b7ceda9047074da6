use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::geometry::{BoundaryGraph, Point};
use crate::operator::ScalarField;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

const ALPHAS: [f64; 9] = [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9];

#[test]
fn normalization_in_one_dimension_at_alpha_one() {
    assert!(rel(normalization_constant(1, 1.0).unwrap(), 1.0 / PI) < 1e-13);
}

#[test]
fn normalization_rejects_bad_alpha() {
    assert!(normalization_constant(2, 2.0).is_err());
    assert!(normalization_constant(2, 0.0).is_err());
    assert!(normalization_constant(0, 1.0).is_err());
}

#[test]
fn normalization_reference_value() {
    // 40-digit reference
    assert!(rel(normalization_constant(3, 1.5).unwrap(), 0.119_050_567_376_701_82) < 1e-13);
}

#[test]
fn normalization_is_continuous_in_alpha() {
    for n in 1..=3 {
        let vals: Vec<f64> = (200..1900).map(|k| normalization_constant(n, k as f64 * 1e-3).unwrap()).collect();
        assert!(vals.iter().all(|v| *v > 0.0));
        for w in vals.windows(2) {
            assert!(rel(w[1], w[0]) < 0.01, "{w:?}");
        }
    }
}

#[test]
fn gamma_vanishes_at_harmonic_exponent() {
    for a in [1.2, 1.5, 1.8] {
        assert_eq!(gamma_coeff(a, a - 1.0).unwrap(), 0.0);
    }
}

#[test]
fn gamma_reference_values() {
    assert!(rel(gamma_coeff(1.5, 1.2).unwrap(), 4.130_057_454_522_093) < 1e-11);
    assert!(rel(gamma_bar_coeff(1.5, 1.2).unwrap(), 1.812_847_377_729_098) < 1e-11);
    assert!(gamma_coeff(1.5, 1.2).unwrap() > 0.0);
    assert_eq!(gamma_bar_coeff(1.5, 0.5).unwrap(), 0.0);
}

#[test]
fn gamma_rejects_out_of_range_exponent() {
    assert!(gamma_coeff(1.5, 1.5).is_err());
    assert!(gamma_coeff(1.5, -1.0).is_err());
}

#[test]
fn hemisphere_moment_values() {
    for a in [0.3, 1.0, 1.7] {
        assert_eq!(hemisphere_moment(1, a).unwrap(), 1.0);
    }
    assert!(rel(hemisphere_moment(2, 1e-300).unwrap(), PI) < 1e-12);
    assert!(rel(hemisphere_moment(2, 1.0).unwrap(), 2.0) < 1e-13);
    // 40-digit reference
    assert!(rel(hemisphere_moment(3, 1.5).unwrap(), 2.513_274_122_871_834_6) < 1e-13);
}

#[test]
fn hemisphere_moment_closed_form_matches_quadrature() {
    for n in 2..=4 {
        for a in [0.1, 0.7, 1.5, 1.9] {
            let c = hemisphere_moment(n, a).unwrap();
            let q = hemisphere_moment_quadrature(n, a).unwrap();
            assert!(rel(q, c) < 1e-11, "n={n} a={a}: {q} vs {c}");
        }
    }
}

#[test]
fn half_space_constants_reference_values() {
    // 50-digit tanh-sinh references with endpoint-flattening substitutions
    assert!(rel(c_half_space(2, 1.5, 1.2).unwrap(), 1.235_740_904_321_985) < 1e-10);
    assert!(rel(lambda_killed(2, 1.5, 1.2).unwrap(), 1.036_269_764_121_269) < 1e-10);
    assert!(rel(lambda_killed(3, 1.2, 0.3).unwrap(), -0.246_976_074_572_963_2) < 1e-10);
    let c = c_half_space(1, 1.8, 0.5).unwrap();
    assert!(rel(c, -0.149_166_843_980_326_4) < 1e-10, "{c}");
}

#[test]
fn regional_lambda_agrees_with_gamma_route() {
    for n in 1..=3 {
        for a in ALPHAS {
            for frac in [0.1, 0.3, 0.5, 0.7, 0.95] {
                let p = frac * a;
                let via_gamma = c_half_space(n, a, p).unwrap();
                let via_killed = lambda_regional(n, a, p).unwrap();
                assert!((via_gamma - via_killed).abs() < 1e-10 * via_gamma.abs().max(1.0), "n={n} a={a} p={p}");
            }
        }
    }
}

#[test]
fn constants_invariants_on_grid() {
    for n in 1..=3 {
        for a in ALPHAS {
            assert!(lambda_killed(n, a, 0.5 * a).unwrap().abs() < 1e-10);
            assert!(c_half_space(n, a, a - 1.0).unwrap().abs() < 1e-10);
            for p in [-0.9, -0.5, 0.0, 0.2, a - 1.0 - 0.05, a - 1.0 + 0.05, a - 0.3, a - 0.05] {
                if p <= -1.0 || p >= a {
                    continue;
                }
                let g = gamma_coeff(a, p).unwrap();
                let mirror = gamma_coeff(a, a - 1.0 - p).unwrap();
                assert!((g - mirror).abs() < 1e-10, "a={a} p={p}");
                let c = c_half_space(n, a, p).unwrap();
                // positive for p < 0 as well: both numerator factors flip sign
                let expected = if p < 0.0 { 1.0 } else { (p - (a - 1.0)).signum() };
                if p != 0.0 && a - 1.0 - p != 0.0 {
                    assert_eq!(c.signum(), expected, "n={n} a={a} p={p} c={c}");
                }
            }
            for frac in [0.1, 0.3, 0.45, 0.55, 0.8, 0.95] {
                let l = lambda_killed(n, a, frac * a).unwrap();
                assert_eq!(l.signum(), (frac - 0.5f64).signum(), "n={n} a={a} frac={frac}");
            }
        }
    }
}

#[test]
fn table_row_has_every_column() {
    let t = ConstantsTable::compute(2, 1.5, 0.9).unwrap();
    assert_eq!(t.csv_row().split(',').count(), ConstantsTable::CSV_HEADER.split(',').count());
    assert!(t.lambda.is_some());
    let t = ConstantsTable::compute(2, 1.5, -0.2).unwrap();
    assert!(t.lambda.is_some());
    assert!(t.csv_row().ends_with(",nan"));
}

#[test]
fn image_only_for_half_space_power() {
    let w = PowerFunction::half_space(2, 1.2);
    let img = catalog_image(&w, 1.5, ImageOperator::Regional).unwrap().unwrap();
    assert!((img.exponent + 0.3).abs() < 1e-15);
    let h = PowerFunction::graph_height(BoundaryGraph::power(2, 1.0, 1.5), 0.75);
    assert!(catalog_image(&h, 1.5, ImageOperator::Regional).unwrap().is_none());
}

#[test]
fn pointwise_values() {
    let w = PowerFunction::half_space(2, 1.0);
    assert_eq!(w.eval(&Point::new(&[0.0, 0.5])), 0.5);
    assert_eq!(w.eval(&Point::new(&[0.0, -0.5])), 0.0);
    let h = PowerFunction::graph_height(BoundaryGraph::power(2, 1.0, 1.5), 0.75);
    assert!(rel(h.eval(&Point::new(&[1.0, 1.25])), 0.25f64.powf(0.75)) < 1e-15);
    assert_eq!(h.eval(&Point::new(&[2.5, 10.0])), 0.0);
}

#[test]
fn truncated_power_vanishes_outside_ball() {
    let u = PowerFunction::truncated(BoundaryGraph::power(3, 1.0, 1.8), 0.8);
    assert!(u.eval(&Point::new(&[0.0, 0.0, 0.5])) > 0.0);
    assert_eq!(u.eval(&Point::new(&[0.0, 0.0, 0.7])), 0.0);
    assert_eq!(u.eval(&Point::new(&[0.5, 0.0, 0.5])), 0.0);
}

#[test]
fn phi_cap_matches_requirements() {
    for k in 0..200 {
        let r = k as f64 * 0.015;
        for th in [0.0, 0.7, 1.5] {
            let y = Point::new(&[r * f64::cos(th), r * f64::sin(th)]);
            let v = phi_cap(&y);
            if r < 0.5 {
                assert!((v - y.tilde_norm().powi(2)).abs() < 1e-15);
            }
            if r >= 1.0 {
                assert!((1.0..=2.0).contains(&v));
            }
        }
    }
}

#[test]
fn barrier_exponent_lies_between() {
    for a in ALPHAS {
        for b in [a + 0.01, 1.95, 2.0] {
            if b <= a {
                continue;
            }
            let p = barrier_exponent(a, b);
            assert!(p > a - 1.0 && p < a, "a={a} b={b} p={p}");
        }
    }
}

#[test]
fn ray_breaks_hit_cutoff_surfaces() {
    let h = PowerFunction::graph_height(BoundaryGraph::power(2, 1.0, 1.5), 0.75);
    let x = Point::new(&[0.5, 1.0]);
    let mut out = Vec::new();
    h.ray_breaks(&x, &Point::new(&[1.0, 0.0]), 10.0, &mut out);
    assert_eq!(out, vec![1.5]);
    out.clear();
    let u = PowerFunction::truncated(BoundaryGraph::power(2, 1.0, 1.5), 0.75);
    u.ray_breaks(&Point::new(&[0.0, 0.1]), &Point::new(&[0.0, 1.0]), 10.0, &mut out);
    assert_eq!(out.len(), 1);
    assert!((out[0] - (TRUNCATION_RADIUS - 0.1)).abs() < 1e-15);
}

proptest! {
    #[test]
    fn gamma_symmetry(a in 1.05f64..1.95, frac in 0.0f64..1.0) {
        let lo = -1.0 + 1e-3;
        let p = lo + frac * (a - 1e-3 - lo);
        let g = gamma_coeff(a, p).unwrap();
        prop_assert!((g - gamma_coeff(a, a - 1.0 - p).unwrap()).abs() < 1e-10 * g.abs().max(1.0));
    }

    #[test]
    fn lambda_sign_chart(n in 1usize..4, a in 1.05f64..1.95, frac in 0.05f64..0.95) {
        let l = lambda_killed(n, a, frac * a).unwrap();
        if (frac - 0.5).abs() > 1e-3 {
            prop_assert_eq!(l.signum(), (frac - 0.5f64).signum());
        }
    }

    #[test]
    fn lambda_sign_follows_both_harmonic_exponents(n in 1usize..4, a in 1.05f64..1.95, p in -0.95f64..1.95) {
        prop_assume!(p < a);
        let (hi, lo) = (a / 2.0, a / 2.0 - 1.0);
        prop_assume!((p - hi).abs() > 1e-3 && (p - lo).abs() > 1e-3);
        let l = lambda_killed(n, a, p).unwrap();
        prop_assert_eq!(l > 0.0, (p - hi) * (p - lo) > 0.0, "n={} a={} p={} lambda={}", n, a, p, l);
    }
}

#[test]
fn lambda_vanishes_at_lower_harmonic_exponent() {
    for n in 1..4 {
        for a in [1.1, 1.5, 1.9] {
            let l = lambda_killed(n, a, a / 2.0 - 1.0).unwrap();
            assert!(l.abs() < 1e-10, "n={n} a={a}: {l}");
        }
    }
}

#[test]
fn lambda_continuous_across_zero() {
    for (n, a) in [(1, 1.3), (2, 1.5), (3, 1.8)] {
        let (lo, hi) = (lambda_killed(n, a, -1e-7).unwrap(), lambda_killed(n, a, 1e-7).unwrap());
        assert!((lo - hi).abs() < 1e-5 * lo.abs(), "n={n} a={a}: {lo} vs {hi}");
    }
}
