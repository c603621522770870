//! Configuration-driven experiments and verification suites.
//!
//! A versioned JSON [`ExperimentConfig`] names a [`Scenario`]; [`run`]
//! executes it, writes its tables and a [`VerificationReport`] under an
//! output directory, and lists every file with its SHA-256 in
//! `manifest.json`. One master seed fans out to labelled sub-seeds, so adding
//! a scenario or a check never perturbs the random streams of another.
//!
//! | exit code | meaning |
//! |-----------|---------|
//! | 0 | every check passed |
//! | 1 | a check failed |
//! | 2 | the configuration is invalid |
//! | 3 | a runtime or I/O error |

mod config;
mod report;
mod run;
mod suites;
mod tables;

pub use config::{
    ConfigError, ErgodicSection, ExperimentConfig, KernelSection, RandomChainConfig, Reference, Scenario,
    SimulateSection, VerifySection, WedgeSection,
};
pub use report::{Check, Oracle, Status, VerificationReport};
pub use run::{run, RunOutcome};
pub use suites::{
    alpha_table, chain_checks, run_suite, scaling_drift, survival_estimates, wedge_alpha_negative,
    wedge_alpha_positive, wedge_alpha_zero, Scale, Suite, SuiteOptions, SURVIVAL_ETAS,
};
pub use tables::{emit_tables, Artifact, Cell, CsvTable, Manifest, ManifestEntry, MANIFEST_NAME};

use crate::kernel::KernelError;
use crate::sim::SimError;
use crate::wedge::WedgeError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error at {0}")]
    Config(#[from] ConfigError),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Runtime(_) | LabError::Io { .. } => 3,
        }
    }
}

impl From<SimError> for LabError {
    fn from(e: SimError) -> Self {
        LabError::Runtime(e.to_string())
    }
}

impl From<KernelError> for LabError {
    fn from(e: KernelError) -> Self {
        LabError::Runtime(e.to_string())
    }
}

impl From<WedgeError> for LabError {
    fn from(e: WedgeError) -> Self {
        LabError::Runtime(e.to_string())
    }
}
