use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function or family.
    #[error("domain error: {0}")]
    Domain(String),

    /// The sample cannot produce a finite estimate (e.g. all Pareto values equal to 1).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// A posterior moment does not exist for this sample size.
    #[error("posterior moment of order {order} requires n >= {required}, got n = {n}")]
    InsufficientSampleSize {
        order: usize,
        n: usize,
        required: usize,
    },

    /// An iterative or adaptive routine stopped before reaching its tolerance.
    #[error("{what} did not converge: achieved {achieved:e}, requested {requested:e}")]
    NonConvergence {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },

    /// A quantity underflowed or overflowed the floating-point range.
    #[error("numeric degeneracy: {0}")]
    Underflow(String),

    /// The requested operation is not available for this family or prior.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Experiment or command configuration is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
