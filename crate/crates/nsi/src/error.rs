//! Crate-wide error type.

use thiserror::Error;

/// Coarse failure class, used by callers (the CLI in particular) to map
/// errors onto exit codes: I/O and format problems, semantic validation
/// problems, and numerical problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Validation,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate tweet id `{0}`: each tweet identifies exactly one interaction edge")]
    DuplicateTweetId(String),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("damping must lie in (0, 1], got {0}")]
    InvalidDamping(f64),

    #[error(
        "damping = 1 needs a connected graph with no isolated nodes \
         (found {components} components); use damping < 1"
    )]
    DisconnectedGraph { components: usize },

    #[error("stationary entry pi[{index}] = {value} is not positive; use damping < 1")]
    NonPositiveStationary { index: usize, value: f64 },

    #[error(
        "power iteration did not converge in {iterations} iterations \
         (residual {residual:e}, tolerance {tolerance:e})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear system is singular or indefinite; set lambda2 > 0 to regularize it")]
    SingularSystem,

    #[error("pos-colored features need annotations, record `{0}` has none")]
    MissingAnnotations(String),

    #[error("record order mismatch at position {position}: expected `{expected}`, found `{found}`")]
    RecordOrderMismatch {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("negative weight {weight} on tweet `{tweet}`")]
    NegativeWeight { tweet: String, weight: f64 },

    #[error("stratified split needs both classes present")]
    SingleClass,

    #[error("train fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),

    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unsupported model file version `{0}`")]
    ModelVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Parse { .. } | Error::EmptyInput(_) | Error::ModelVersion(_) => {
                ErrorClass::Io
            }
            Error::NoConvergence { .. } | Error::SingularSystem => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
