use std::fmt;

/// Summary attached to a quadrature that did not meet its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub intervals: usize,
    pub context: String,
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: |value| = {:.6e}, error estimate = {:.3e}, {} evaluations over {} intervals",
            self.context, self.value, self.error_estimate, self.evaluations, self.intervals
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("integral failed to converge ({0})")]
    IntegralFailure(Box<Diagnostics>),

    #[error("integrand returned a non-finite value {value} at x = {location}")]
    Integrand { location: f64, value: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("function is unbounded below: {0}")]
    UnboundedBelow(String),

    #[error("level set has infinite width: {0}")]
    InfiniteWidth(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegralFailure(_)
                | Error::Integrand { .. }
                | Error::Divergence(_)
                | Error::UnboundedBelow(_)
                | Error::InfiniteWidth(_)
                | Error::SingularSystem(_)
        )
    }
}
