//! Domains (half-space, graph domains, balls, Lipschitz wedges), boxes above
//! boundary points, and the distance / nearest-point / reflection queries.

mod domain;
mod graph;
mod point;
mod region;

pub use domain::{DomainGeometry, Projection};
pub use graph::{BoundaryGraph, GraphGradientFn, GraphProjection, GraphShape, GraphValueFn};
pub use point::{Point, MAX_DIM};
pub use region::{BoxRegion, Region};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point is not inside the domain")]
    NotInDomain,
    #[error("distance {distance} is outside the declared uniqueness collar {collar}")]
    OutsideCollar { distance: f64, collar: f64 },
    #[error("nearest boundary point is not unique")]
    Ambiguous,
    #[error("domain has no boundary graph")]
    NotAGraph,
    #[error("{0}")]
    InvalidShape(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    fn power(beta: f64) -> DomainGeometry {
        DomainGeometry::graph(BoundaryGraph::power(2, 1.0, beta))
    }

    fn brute_distance(g: &BoundaryGraph, x: &Point, half_width: f64) -> f64 {
        let m = 400_000;
        (0..=m)
            .map(|i| {
                let s = x[0] - half_width + 2.0 * half_width * i as f64 / m as f64;
                let q = p(&[s, g.value(&[s])]);
                x.dist(&q)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn membership() {
        assert!(DomainGeometry::half_space(2).contains(&p(&[0.0, 1.0])));
        assert!(!power(1.5).contains(&p(&[1.0, 0.5])));
        let ball = DomainGeometry::ball(p(&[0.0, 0.0]), 1.0);
        assert!(!ball.contains(&p(&[0.6, 0.8])));
        assert!(ball.contains(&p(&[0.6, 0.7])));
        let wedge = DomainGeometry::wedge(2, 1.0);
        assert!(wedge.contains(&p(&[0.5, 0.6])) && !wedge.contains(&p(&[-0.5, 0.4])));
    }

    #[test]
    fn closed_form_distances() {
        assert_eq!(DomainGeometry::half_space(2).distance(&p(&[3.0, 0.7])), 0.7);
        let ball = DomainGeometry::ball(p(&[0.0, 0.0]), 1.0);
        assert!((ball.distance(&p(&[0.5, 0.0])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn graph_distance_matches_boundary_sampling() {
        let d = power(1.5);
        let x = p(&[0.0, 0.2]);
        let rho = d.distance(&x);
        let g = d.as_graph().unwrap();
        let oracle = brute_distance(&g, &x, 0.3);
        assert!(rho <= 0.2);
        // sup |∇Γ| over the relevant patch |s| <= 0.3
        let lip = 1.5 * 0.3f64.sqrt();
        assert!(rho >= 0.2 / (1.0 + lip));
        assert!((rho - oracle).abs() < 1e-8, "{rho} vs {oracle}");
        // axis points of |s|^1.5 have two symmetric nearest points
        assert!(d.project(&x).ambiguous);
        assert_eq!(d.nearest_boundary_point(&x, 1.0), Err(GeometryError::Ambiguous));
    }

    #[test]
    fn heights() {
        let flat = DomainGeometry::graph(BoundaryGraph::zero(2));
        assert_eq!(flat.height(&p(&[1.0, 0.3])).unwrap(), 0.3);
        assert!((power(1.5).height(&p(&[1.0, 1.4])).unwrap() - 0.4).abs() < 1e-15);
        let x = p(&[0.4, 0.9]);
        assert!((flat.height(&x).unwrap() - flat.distance(&x)).abs() < 1e-14);
        assert!(DomainGeometry::ball(p(&[0.0, 0.0]), 1.0).height(&x).is_err());
    }

    #[test]
    fn nearest_points_and_reflections() {
        let hs = DomainGeometry::half_space(2);
        assert_eq!(hs.nearest_boundary_point(&p(&[2.0, 0.5]), 1.0).unwrap(), p(&[2.0, 0.0]));
        let x = p(&[1.0, 0.3]);
        let xr = hs.reflect(&x, 1.0).unwrap();
        assert_eq!(xr, p(&[1.0, -0.3]));
        assert!(hs.nearest_boundary_point(&p(&[0.0, 2.0]), 1.0).is_err());

        let ball = DomainGeometry::ball(p(&[0.0, 0.0]), 1.0);
        assert!(ball.nearest_boundary_point(&p(&[0.5, 0.0]), 1.0).unwrap().dist(&p(&[1.0, 0.0])) < 1e-15);
        assert!(ball.reflect(&p(&[0.5, 0.0]), 1.0).unwrap().dist(&p(&[1.5, 0.0])) < 1e-15);
    }

    #[test]
    fn smooth_graph_foot_is_stationary() {
        let g = BoundaryGraph::power(2, 0.5, 2.0);
        let d = DomainGeometry::graph(g.clone());
        for x in [p(&[0.3, 0.8]), p(&[-1.2, 1.0]), p(&[2.0, 2.5])] {
            let xi = d.nearest_boundary_point(&x, 10.0).unwrap();
            let mut grad = [0.0];
            g.gradient(&xi.tilde()[..1], &mut grad);
            let res = (x[0] - xi[0]) + (x[1] - g.value(xi.tilde())) * grad[0];
            assert!(res.abs() < 1e-6, "residual {res}");
            assert!((x.dist(&xi) - d.distance(&x)).abs() < 1e-8);
        }
    }

    #[test]
    fn graph_projection_in_three_dimensions() {
        let g = BoundaryGraph::power(3, 1.0, 1.8);
        let d = DomainGeometry::graph(g.clone());
        let x = p(&[0.2, -0.1, 0.5]);
        let pr = d.project(&x);
        // compare with a dense sample of the graph near the foot
        let mut best = f64::INFINITY;
        let m = 600;
        for i in 0..=m {
            for j in 0..=m {
                let s = [pr.foot[0] - 0.01 + 0.02 * i as f64 / m as f64, pr.foot[1] - 0.01 + 0.02 * j as f64 / m as f64];
                best = best.min(x.dist(&Point::from_parts(&s, g.value(&s))));
            }
        }
        assert!(pr.distance <= best + 1e-12);
        assert!(best - pr.distance < 1e-8);
    }

    #[test]
    fn wedge_closed_form_matches_newton() {
        let w = DomainGeometry::wedge(2, 1.0);
        let as_graph = DomainGeometry::graph(BoundaryGraph::cone(2, 1.0));
        for x in [p(&[0.1, 0.5]), p(&[-0.3, 0.4]), p(&[0.0, 0.7]), p(&[0.02, 0.05])] {
            let (a, b) = (w.distance(&x), as_graph.distance(&x));
            assert!((a - b).abs() < 1e-8, "{x}: {a} vs {b}");
        }
        let w3 = DomainGeometry::wedge(3, 2.0);
        let g3 = DomainGeometry::graph(BoundaryGraph::cone(3, 2.0));
        let x = p(&[0.1, 0.2, 1.0]);
        assert!((w3.distance(&x) - g3.distance(&x)).abs() < 1e-8);
    }

    #[test]
    fn boxes() {
        let b = BoxRegion::new(p(&[0.0, 0.0]), 1.0, 1.0, DomainGeometry::graph(BoundaryGraph::zero(2))).unwrap();
        assert!(b.contains(&p(&[0.5, 0.5])));
        assert!(!b.contains(&p(&[0.5, 1.5])));
        assert!(!b.contains(&p(&[1.5, 0.5])));
        assert!(BoxRegion::new(p(&[0.0, 0.3]), 1.0, 1.0, DomainGeometry::half_space(2)).is_err());
        let curved = BoxRegion::new(p(&[0.0, 0.0]), 0.5, 1.0, power(1.5)).unwrap();
        assert!(curved.contains(&p(&[0.8, 0.8])) && !curved.contains(&p(&[0.8, 1.3])));
    }

    #[test]
    fn ray_crossings_are_on_the_boundary() {
        let doms = [
            DomainGeometry::half_space(2),
            DomainGeometry::ball(p(&[0.0, 0.0]), 1.0),
            power(1.5),
            DomainGeometry::wedge(2, 1.0),
        ];
        let x = p(&[0.1, 0.3]);
        for d in &doms {
            for k in 0..16 {
                let th = 0.4 + k as f64 * std::f64::consts::PI / 8.0;
                let dir = p(&[th.cos(), th.sin()]);
                let mut out = Vec::new();
                d.ray_crossings(&x, &dir, 1e3, &mut out);
                for r in &out {
                    assert!(d.distance(&(x + dir * *r)) < 1e-9 * (1.0 + r), "{d:?} {th} {r}");
                }
                // crossing count parity matches membership change
                let far = x + dir * 1e3;
                assert_eq!(out.len() % 2 == 1, d.contains(&x) != d.contains(&far), "{d:?} {th}");
            }
        }
    }

    #[test]
    fn power_graph_data() {
        let g = BoundaryGraph::power(2, 1.0, 1.5);
        assert!(g.is_normalized());
        let grid: Vec<Vec<f64>> = (-40..=40).map(|i| vec![i as f64 / 20.0]).collect();
        assert!(g.sampled_hoelder_quotient(&grid) <= 1.05 * g.hoelder_norm());
        let g3 = BoundaryGraph::power(3, 0.7, 1.8);
        let grid3: Vec<Vec<f64>> = (-8..=8)
            .flat_map(|i| (-8..=8).map(move |j| vec![i as f64 / 8.0, j as f64 / 8.0]))
            .collect();
        assert!(g3.sampled_hoelder_quotient(&grid3) <= 1.05 * g3.hoelder_norm());
    }

    #[test]
    fn scaling_maps_membership() {
        let d = power(1.5);
        let s = d.scaled(3.0);
        for x in [p(&[0.2, 0.1]), p(&[0.5, 0.3]), p(&[-0.4, 0.26])] {
            assert_eq!(d.contains(&x), s.contains(&(x * 3.0)));
            assert!((s.distance(&(x * 3.0)) - 3.0 * d.distance(&x)).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn distance_height_comparability(s in -1.0f64..1.0, h in 1e-3f64..1.0, beta in 1.1f64..2.0) {
            let d = power(beta);
            let g = d.as_graph().unwrap();
            let x = p(&[s, g.value(&[s]) + h]);
            let rho = d.distance(&x);
            let lip = beta * 2f64.powf(beta - 1.0);
            prop_assert!(rho <= h * (1.0 + 1e-12));
            prop_assert!(h <= (1.0 + lip) * rho * (1.0 + 1e-9));
        }

        #[test]
        fn reflection_is_isometric(s in -2.0f64..2.0, h in 1e-3f64..0.5) {
            let d = DomainGeometry::graph(BoundaryGraph::power(2, 0.5, 2.0));
            let x = p(&[s, 0.5 * s * s + h]);
            if let Ok(xi) = d.nearest_boundary_point(&x, 1.0) {
                let xr = d.reflect(&x, 1.0).unwrap();
                prop_assert!((xr.dist(&xi) - x.dist(&xi)).abs() < 1e-12);
            }
            let hs = DomainGeometry::half_space(2);
            let y = p(&[s, h]);
            let back = hs.reflect(&y, 1.0).unwrap().with_last(h);
            prop_assert_eq!(back, y);
        }

        #[test]
        fn distance_is_one_lipschitz(s0 in -1.0f64..1.0, h0 in 0.01f64..1.0, s1 in -1.0f64..1.0, h1 in 0.01f64..1.0) {
            for d in [power(1.5), DomainGeometry::wedge(2, 1.0), DomainGeometry::ball(p(&[0.0, 2.0]), 2.5)] {
                let g = |s: f64, h: f64| match d.as_graph() {
                    Some(gr) => p(&[s, gr.value(&[s]) + h]),
                    None => p(&[s, 2.0 + h]),
                };
                let (x, y) = (g(s0, h0), g(s1, h1));
                prop_assert!((d.distance(&x) - d.distance(&y)).abs() <= x.dist(&y) * (1.0 + 1e-9) + 1e-10);
            }
        }
    }
}
