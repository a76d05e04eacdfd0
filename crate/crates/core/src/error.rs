//! Error type shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by construction, scaling, decomposition and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("a {n}x{n} matrix needs {expected} entries, got {got}")]
    EntryCount { n: usize, expected: usize, got: usize },

    #[error("entry ({row}, {col}) is not finite: {value}")]
    NonFiniteEntry { row: usize, col: usize, value: Complex64 },

    #[error("angle {index} is not finite: {value}")]
    NonFiniteAngle { index: usize, value: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("input is not unitary: residual {residual:.3e} exceeds tolerance {tol:.0e}")]
    NonUnitaryInput { residual: f64, tol: f64 },

    #[error("operation requires a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("XZXZXZ decomposition requires even dimension, got {n}")]
    OddDimension { n: usize },

    #[error(
        "scaling did not converge: stopped {} after {} iterations with residual {:.3e}",
        .result.status,
        .result.trace.final_record().k,
        .result.trace.final_record().residual
    )]
    ScalingDidNotConverge { result: Box<crate::scale::ScaleResult> },

    #[error("invalid scaling configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("malformed matrix JSON")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
