//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines.
///
/// Variants fall in two families that the command-line front end maps to
/// different exit codes: invalid input ([`Error::Invalid`], [`Error::Domain`],
/// [`Error::Degenerate`], [`Error::Io`]) and numerical trouble
/// ([`Error::NonConvergence`], [`Error::Tolerance`], [`Error::Blowup`]).
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments does not hold.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A requested range lies outside the computed domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Geometry is degenerate (collinear points, zero vectors, ...).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    /// An iterative procedure (extrapolation, limit extraction) did not settle.
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    /// An integrator could not meet its tolerance or an invariant drifted.
    #[error("tolerance not achieved: {0}")]
    Tolerance(String),
    /// A time stepper detected runaway growth.
    #[error("blow-up detected: {0}")]
    Blowup(String),
    /// Reading or writing an artifact failed.
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_) | Error::Tolerance(_) | Error::Blowup(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
