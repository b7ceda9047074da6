//! Closed-form constants and explicit power-type functions whose operator
//! images are known, used as oracles for the operator module.

mod constants;
mod functions;

pub use constants::{
    c_half_space, c_half_space_reflected, gamma_bar_coeff, gamma_coeff, hemisphere_moment,
    hemisphere_moment_quadrature, lambda_killed, lambda_regional, normalization_constant, ConstantsTable,
};
pub use functions::{
    barrier_exponent, phi_cap, BarrierKind, BarrierParams, PowerFunction, LATERAL_CUTOFF, TRUNCATION_RADIUS,
};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("{what} did not converge: value {value}, error estimate {error}")]
    NotConverged { what: &'static str, value: f64, error: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which operator the image refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageOperator {
    /// Regional operator on the half-space, κ ≡ 1.
    Regional,
    /// Regional operator with the reflection-ratio kernel.
    ReflectionRatio,
    /// Full-space fractional Laplacian of the zero extension.
    FullSpace,
}

/// Operator image `constant · x_n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerImage {
    pub constant: f64,
    pub exponent: f64,
}

impl PowerImage {
    pub fn at(&self, x: &crate::geometry::Point) -> f64 {
        self.constant * x.last().powf(self.exponent)
    }
}

/// Closed-form image where one exists: only the half-space power has one;
/// graph-domain powers only satisfy bounds.
pub fn catalog_image(f: &PowerFunction, alpha: f64, op: ImageOperator) -> Result<Option<PowerImage>, CatalogError> {
    let PowerFunction::HalfSpace { dim, p } = f else {
        return Ok(None);
    };
    let constant = match op {
        ImageOperator::Regional => c_half_space(*dim, alpha, *p)?,
        ImageOperator::ReflectionRatio => c_half_space_reflected(*dim, alpha, *p)?,
        ImageOperator::FullSpace => lambda_killed(*dim, alpha, *p)?,
    };
    Ok(Some(PowerImage { constant, exponent: p - alpha }))
}

#[cfg(test)]
mod tests;
