//! Scripted reproductions driven by a TOML configuration: boundary-decay
//! exponent fits, Harnack and Carleson scans, curved-domain operator scans,
//! Lipschitz ratio checks, the Dynkin identity and dilation scaling.
//!
//! Every experiment returns an [`ExperimentReport`] holding a CSV table and a
//! list of named pass/fail checks.

mod boxes;
mod config;
mod curved;
mod dynkin;
mod fit;
mod report;

pub use boxes::{bhi_decay_fit, carleson_scan, harnack_scan, lipschitz_ratio, scaling_check};
pub use config::{
    ChainSpec, CurvedRole, CurvedSpec, DomainSpec, DynkinSpec, ExperimentConfig, ExperimentKind, HarnackSpec,
    KernelSpec, LadderSpec, ModeSpec, ScalingSpec,
};
pub use curved::curved_bound_scan;
pub use dynkin::{dynkin_experiment, SmoothBump};
pub use fit::{fit_exponent, fit_exponent_unweighted, ExponentFit};
pub use report::{Check, CsvTable, ExperimentReport};

use thiserror::Error;

use crate::operator::OperatorError;
use crate::simulator::SimulationError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Runs the experiment named by `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::BhiFit => bhi_decay_fit(cfg),
        ExperimentKind::Harnack => harnack_scan(cfg),
        ExperimentKind::Carleson => carleson_scan(cfg),
        ExperimentKind::CurvedScan => curved_bound_scan(cfg),
        ExperimentKind::Lipschitz => lipschitz_ratio(cfg),
        ExperimentKind::Dynkin => dynkin_experiment(cfg),
        ExperimentKind::Scaling => scaling_check(cfg),
    }
}

#[cfg(test)]
mod tests;
