//! Numerical toolkit for boundary behaviour of nonnegative functions that are
//! harmonic for censored (regional) and killed fractional Laplacians with
//! state-dependent kernels.
//!
//! The crate has two independent routes to the same quantities:
//! deterministic principal-value quadrature ([`operator`]) and Monte Carlo on
//! truncated jump chains ([`simulator`]). Closed forms live in [`catalog`].

pub mod catalog;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod numerics;
pub mod operator;
pub mod simulator;

pub use geometry::{BoundaryGraph, BoxRegion, DomainGeometry, GraphShape, Point, Region};
pub use kernels::Kernel;
pub use numerics::{IntegralResult, QuadratureSpec};
