use thiserror::Error;

/// Errors raised by the bound, solver and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A derivative was requested where the scaling law is clamped at p = 1.
    #[error("derivative requested in the clamped region (k = {k}, k_max = {k_max})")]
    ClampedRegion { k: f64, k_max: f64 },

    /// No closed-form Lipschitz constant is available for this law.
    #[error("no closed-form Lipschitz constant for {0}")]
    NoClosedFormLipschitz(&'static str),

    /// A solver produced a non-finite objective or slope.
    #[error("solver error at k = {k}: {reason}")]
    Solver { k: f64, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
