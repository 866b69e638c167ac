use thiserror::Error;

/// Errors raised by the kernel, the model and the simulators.
///
/// Infeasible budgets are not errors: the solver reports them as
/// [`crate::solver::PointStatus::Infeasible`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{param} = {value} is outside its domain ({expected})")]
    Domain {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("numerical integrity violated: {what} = {value:e}")]
    NumericalIntegrity { what: &'static str, value: f64 },

    #[error("malformed document at `{path}`: {message}")]
    Document { path: String, message: String },

    #[error("search space too large: {count} candidates exceed the limit of {limit}")]
    SearchSpace { count: u128, limit: u128 },

    #[error("sequence space too large: {required} sequences required, ceiling is {allowed}")]
    Ceiling { required: u128, allowed: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
