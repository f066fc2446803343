//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),

    /// `(I - P^NA)` restricted to the declared transient set is numerically
    /// singular, i.e. the set is not actually transient.
    #[error("singular absorption system: declared transient set is not transient")]
    SingularSystem,

    #[error("restricted matrix is not irreducible: {0}")]
    NotIrreducible(String),

    #[error("class is not closed: {0}")]
    ClassNotClosed(String),

    #[error("absorption profile and stationary laws were computed at different anchors")]
    AnchorMismatch,

    #[error("ergodic-class structure varies across the sample grid: {0}")]
    ClassStructureVaries(String),

    #[error("no step count up to {max_steps} certifies absorption below z0 target {target}")]
    NoAbsorptionBound { max_steps: usize, target: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("jump sequence too short: need {needed} points, have {have}")]
    SequenceTooShort { needed: usize, have: usize },

    #[error(
        "trajectory too short for tail tolerance {tail_tol:e}: need up to jump {needed}, have {have}"
    )]
    TruncationInsufficient {
        needed: usize,
        have: usize,
        tail_tol: f64,
    },

    #[error("sequence leaves the stability ball: sup 1-norm distance {sup} exceeds radius {radius}")]
    BallViolation { sup: f64, radius: f64 },

    #[error("decomposition at the requested point has no class matching index {class}")]
    ClassMissing { class: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource guard: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
