use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular or indefinite quadratic term (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    Singular { lambda_min: f64, lambda_max: f64 },
    #[error("degenerate right-hand side: b = 0 has no unit-norm stationary point")]
    DegenerateRhs,
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("{method} is not defined on space {space}")]
    UnsupportedSpace {
        method: &'static str,
        space: &'static str,
    },
    #[error("projection onto the unit sphere is undefined at the origin")]
    ZeroProjection,
    #[error("leave-one-out forecasts are required")]
    MissingLoo,
    #[error("leverage h = {0} >= 1 makes the leave-one-out forecast undefined")]
    Leverage(f64),
}
