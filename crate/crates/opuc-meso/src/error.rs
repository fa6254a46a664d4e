use thiserror::Error;

/// Failure modes shared by every module.
///
/// The split matters to the command line: input problems map to exit
/// code 2 and numerical breakdowns to exit code 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("coefficient {index} is outside the open unit disk (|alpha| = {modulus})")]
    OutOfDisk { index: usize, modulus: f64 },
    #[error("moment matrix is not positive definite at order {order}")]
    NotPositiveDefinite { order: usize },
    #[error("singular factorization (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },
    #[error("no convergence: last two estimates {previous} and {last}")]
    NoConvergence { previous: f64, last: f64 },
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("sample {index}: {source}")]
    Sample { index: usize, source: Box<Error> },
}

impl Error {
    /// True for errors caused by the caller's input rather than by arithmetic.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Invalid(_) | Error::Parse(_) | Error::Unsupported(_) | Error::OutOfDisk { .. } => true,
            Error::Sample { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
