//! Monte Carlo convergence experiments, stability analysis and reporting.

pub mod experiment;
pub mod increments;
pub mod report;
pub mod stability;
pub mod vdp;

use thiserror::Error;

use crate::schemes::SchemeError;
use crate::solvers::SolveError;

pub use experiment::{Experiment, ExperimentResult, Moments, Reference};
pub use increments::{aggregate, sample_increments, PathIncrements, PathStream};
pub use report::{estimate_order, read_csv, write_csv, Fit};
pub use stability::{ms_stability_factor, ms_stability_monte_carlo, StabilityEstimate, StabilityScheme};
pub use vdp::{vdp_demo, VdpDemo};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("{factor} does not divide {steps} steps")]
    Divisibility { steps: usize, factor: usize },
    #[error("problem {0} has no exact solution; a reference solution is required")]
    MissingExactSolution(String),
    #[error("problem {0} has no weak functional with known expectation")]
    MissingWeakFunctional(String),
    #[error("{aborted} of {paths} paths aborted at h = {h}")]
    TooManyAborts { h: f64, aborted: usize, paths: usize },
    #[error("order fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Desk-scale step sizes `2⁻ᵃ … 2⁻ᵇ`.
pub fn dyadic_steps(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}
