//! Crate-wide error type.
//!
//! Errors are grouped into three classes so callers (notably the CLI) can
//! map them onto distinct exit codes: configuration problems, data problems,
//! and internal invariant violations.

use thiserror::Error;

/// Coarse classification used by the CLI exit-code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or inconsistent configuration (exit 2).
    Config,
    /// Bad, missing, or insufficient input data (exit 3).
    Data,
    /// A broken internal invariant (exit 4).
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dates out of order: {0}")]
    DateOrder(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient history: need {needed} observations, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("wealth wiped out on day {day}: portfolio return {ret}")]
    WealthWipeout { day: usize, ret: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Config,
            Error::Parse { .. }
            | Error::InsufficientData(_)
            | Error::DateOrder(_)
            | Error::Io(_)
            | Error::WealthWipeout { .. } => ErrorClass::Data,
            Error::InsufficientHistory { .. }
            | Error::OutOfRange(_)
            | Error::ShapeMismatch(_)
            | Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
