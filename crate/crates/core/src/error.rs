//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced while building or analyzing mode-transformed measurements.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be unitary failed the `U U^dag = I` check.
    #[error(
        "matrix is not unitary: max deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotUnitary { deviation: f64, tolerance: f64 },

    /// Matrix or vector dimensions are inconsistent with the requested operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A mode index lies outside `1..=n`.
    #[error("mode index {index} out of range 1..={n}")]
    ModeIndex { index: usize, n: usize },

    /// The dual-rail layout needs at least `2d` modes.
    #[error("need at least {required} modes for local dimension {d}, got {n}")]
    TooFewModes { d: usize, n: usize, required: usize },

    /// A two-particle input state has (numerically) zero norm.
    #[error("state has zero norm")]
    ZeroNorm,

    /// A state that must be normalized is not.
    #[error("state is not normalized: Tr(C^dag C) deviates from 1 by {defect:.3e}")]
    NotNormalized { defect: f64 },

    /// A file parsed as JSON but violates the documented input schema.
    #[error("invalid input: {0}")]
    Input(String),

    /// Fermionic statistics forbid two particles in one mode.
    #[error("fermions cannot doubly occupy mode {0}")]
    PauliViolation(usize),

    /// The requested detection pattern does not exist for this configuration.
    #[error("invalid detection pattern ({i}, {j}): {reason}")]
    Pattern { i: usize, j: usize, reason: String },

    /// Input vectors do not form a valid rank-one POVM.
    #[error("vectors do not resolve the identity: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotAPovm { residual: f64, tolerance: f64 },

    /// A quantity guaranteed by the theory was violated numerically.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Failure while reading or writing a JSON artifact.
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}
