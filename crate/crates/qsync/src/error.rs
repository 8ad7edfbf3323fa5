//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by solvers, state constructors and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, grid or state failed validation before any numerics ran.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An integrator lost the solution (NaN/Inf or vanishing step size).
    #[error("solver diverged: {0}")]
    SolverDivergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidInput`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Shorthand for [`Error::SolverDivergence`].
    pub fn diverged(msg: impl Into<String>) -> Self {
        Error::SolverDivergence(msg.into())
    }
}
