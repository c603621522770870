//! Monte Carlo for reflected diffusions in (perturbed) planar wedges.
//!
//! Paths follow the Euler scheme
//!
//! ```text
//! x' = x + b(x) h + σ(x) √h ξ
//! ```
//!
//! and any proposal that leaves the domain is pushed back along the face's
//! reflection vector by the smallest feasible amount. The origin is
//! operationalized as the ball `B_η(0)`: a path entering it is absorbed, or
//! restarted at `ρ g⁰` in restart mode.
//!
//! Every replicate draws from its own stream keyed by
//! `(master seed, label, replicate index)` and results are gathered in index
//! order, so outputs do not depend on the worker count.

mod coeffs;
mod domain;
mod engine;
mod estimators;
mod output;
mod params;
mod stats;

pub use coeffs::{Coefficients, Mat2};
pub use domain::{Domain, DomainKind, DomainSpec, Perturbation};
pub use engine::{
    reflect_step, run_replicates, simulate_path, simulate_to_shell, PathOutcome, PathPoint,
    StepOutcome, Terminal,
};
pub use estimators::{
    basic_identity_check, contraction_transfer, entry_law, estimate_kernel, estimate_kernel_chain,
    mean_exit_time, replicate_outcomes, rescaled_exit_law, survival_probability, survival_sweep, BasicIdentity,
    ContractionTransfer, EmpiricalKernel, ExitLaw, ExitTimeEstimate, IdentityInputs, SurvivalEstimate,
};
pub use output::{kernel_document, outcome_csv, path_csv, real, sha256_hex, Fingerprint};
pub use params::{EtaRule, ShellLadder, SimParams, StepRule, DEFAULT_H_FACTOR, DEFAULT_MAX_STEPS};
pub use stats::{ks_critical_1pct, ks_two_sample, mean_and_stderr, wilson_interval, WILSON_Z};

use crate::kernel::KernelError;
use crate::wedge::WedgeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error("start point ({x}, {y}) lies outside the domain")]
    StartOutside { x: f64, y: f64 },
    #[error("start radius {radius} must lie in [eta, target) = [{eta}, {target})")]
    StartRadius { radius: f64, eta: f64, target: f64 },
    #[error("degenerate request: {0}")]
    EmptyRequest(String),
    #[error("could not build worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Wedge(#[from] WedgeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
