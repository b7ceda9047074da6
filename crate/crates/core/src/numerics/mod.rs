//! Special functions and one-dimensional quadrature with algebraic endpoint
//! singularities.

mod integrate;
mod rules;
mod special;

pub use integrate::{integrate_singular, IntegralResult, QuadratureSpec};
pub use rules::{gauss_jacobi, gauss_legendre, graded_cost, graded_nodes, graded_sum, graded_visit, Endpoint, GradedParams, UnitRule};
pub use special::{beta_fn, gamma_fn, ln_gamma, sphere_area};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("argument {0} outside the domain of {1}")]
    Domain(f64, &'static str),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
