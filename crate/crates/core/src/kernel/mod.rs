//! Finite-state algebra of sub-stochastic kernels.
//!
//! A chain `Q_1, Q_2, …, Q_K` with `Q_l : E_l → E_{l-1}` is normalized by
//! its survival vectors `s_k = Q_k ⋯ Q_1 1` into probability kernels `P_l`.
//! Whenever the survival ratio `min s_k / max s_k` stays above `c₀` and every
//! pair of rows of every `Q_l` shares mass at least `ε₀`, the backward
//! products of the `P_l` contract in total variation at rate `1 - ε₀c₀`, and
//!
//! ```text
//! ⟨ν_k, Q_k ⋯ Q_1 f⟩ / ⟨ν_k, Q_k ⋯ Q_1 1⟩ → C(f)
//! ```
//!
//! for any sequence of entry laws `ν_k`.

mod chain;
pub mod interchange;
mod matrix;
mod random;
mod space;

pub use chain::{ChainSequence, ContractionCertificate, ErgodicLimit, TvBoundCheck};
pub use matrix::{tv_distance, MeasureVec, SubKernel, MASS_TOLERANCE};
pub use random::{random_chain, RandomChainSpec};
pub use space::FiniteStateSpace;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("state space must contain at least one state")]
    EmptySpace,
    #[error("duplicate state label {label:?} at positions {first} and {second}")]
    DuplicateLabel {
        label: String,
        first: usize,
        second: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) = {value} is negative or not finite")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} has mass {sum} > 1")]
    RowMassExceeded { row: usize, sum: f64 },
    #[error("kernel is identically zero")]
    ZeroKernel,
    #[error("mass entry {index} = {value} is negative or not finite")]
    NegativeMass { index: usize, value: f64 },
    #[error("measure total {total} is outside the admissible range")]
    MeasureMass { total: f64 },
    #[error("state spaces differ ({context})")]
    SpaceMismatch { context: String },
    #[error("chain must contain at least one kernel")]
    EmptyChain,
    #[error("Q_{level} does not map into the source space of Q_{}", level - 1)]
    IncompatibleLevels { level: usize },
    #[error("level {level} out of range for a chain of {len} kernels")]
    LevelOutOfRange { level: usize, len: usize },
    #[error("state {state} out of range for a space of size {size}")]
    StateOutOfRange { state: usize, size: usize },
    #[error("function values must be finite")]
    NonFinite,
    #[error("chain dies at state {state}, level {level}")]
    DeadState { state: usize, level: usize },
    #[error("chain is dead at level {level}: every survival entry is zero")]
    DeadChain { level: usize },
    #[error("initial law charges only dead states")]
    DeadEntryLaw,
    #[error("condition {condition} violated at level {level}{}: value {value}",
        pair.map(|(x, y)| format!(", pair ({x}, {y})")).unwrap_or_default())]
    ConditionViolated {
        condition: &'static str,
        level: usize,
        pair: Option<(usize, usize)>,
        value: f64,
    },
    #[error("horizon exhausted at k = {k}; best bracket [{lower}, {upper}]")]
    HorizonExhausted { k: usize, lower: f64, upper: f64 },
    #[error("floors must lie in (0, 1): c0 = {c0}, eps0 = {eps0}")]
    InvalidFloors { c0: f64, eps0: f64 },
    #[error("invalid level sizes {0:?}")]
    InvalidSizes(Vec<usize>),
    #[error("rejection sampling gave up at level {level} after {attempts} attempts")]
    RejectionBudget { level: usize, attempts: usize },
}
