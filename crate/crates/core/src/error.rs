use thiserror::Error;

/// Errors raised by the numerical and statistical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative scheme exhausted its iteration budget.
    #[error("{0} failed to converge")]
    NoConvergence(&'static str),

    /// The inputs make a closed-form expression degenerate (division by zero, infinite optimum).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A coefficient is undefined at the requested point.
    #[error("undefined coefficient: {0}")]
    Undefined(String),

    /// No point below `x_max` reaches the requested probability level.
    #[error("quantile for p = {p} not attained below x = {x_max}")]
    UnattainableQuantile { p: f64, x_max: f64 },

    /// The exact MSE is zero, so no finite EDF sample size matches it.
    #[error("unbounded deficiency: exact MSE is zero")]
    UnboundedDeficiency,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
