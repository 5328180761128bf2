use num_complex::Complex64;
use thiserror::Error;

use crate::shift::Word;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class; the CLI maps each class onto an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Resource,
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shift: {0}")]
    InvalidShift(String),

    #[error("word {word} is not admissible")]
    Inadmissible { word: Word },

    #[error("{what}: {count} items exceeds the cap of {cap}")]
    ResourceCap { what: &'static str, count: u128, cap: u128 },

    #[error("{what} did not converge after {iterations} iterations (last estimate {last})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("depth mismatch: expected at most {expected}, found {found}")]
    DepthMismatch { expected: usize, found: usize },

    #[error("z at or near pole: z = {z}, reciprocal condition {rcond:e}")]
    NearPole { z: Complex64, rcond: f64 },

    #[error("no root in searched range [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("degenerate family: pressure derivative {0:e}")]
    Degenerate(f64),

    #[error("not summable: {0}")]
    NotSummable(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidShift(_) | Error::Invalid(_) => ErrorKind::Config,
            Error::NonConvergence { .. }
            | Error::NoBracket { .. }
            | Error::Degenerate(_)
            | Error::Eigensolver(_) => ErrorKind::Numeric,
            Error::ResourceCap { .. } => ErrorKind::Resource,
            Error::Inadmissible { .. }
            | Error::DepthMismatch { .. }
            | Error::NearPole { .. }
            | Error::NotSummable(_)
            | Error::Precondition(_) => ErrorKind::Precondition,
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
