use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero")]
    DivideByZero,

    /// Exact graph routines work on 64-bit vertex masks.
    #[error("graph has {0} vertices; exact routines support at most 64")]
    TooLarge(usize),

    /// The exact solver ran out of its node budget. `best` is the size of the
    /// largest induced tree found before giving up (a lower bound on T(G)).
    #[error("solver budget of {limit} nodes exceeded (best so far: {best})")]
    BudgetExceeded { limit: u64, best: usize },

    /// The scan for k0 observed a ratio sequence that is not decreasing where
    /// it must be. Indicates a floating point breakdown.
    #[error("expectation ratio not decreasing at k = {k}")]
    NonMonotoneRatio { k: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
