use thiserror::Error;

/// Errors raised by the numerical modules and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter domain: {0}")]
    ParameterDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: operands live on different radial grids")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonconvergence(String),

    #[error("bubble fit is singular: {0}")]
    FitSingular(String),

    #[error("eigen-solver breakdown: {0}")]
    EigenBreakdown(String),

    #[error("exponent relation violated: {0}")]
    ExponentRelation(String),

    #[error("no convergence after {iterations} iterations: {message}")]
    NonConvergence {
        message: String,
        iterations: usize,
        last_iterate: Vec<f64>,
        last_value: f64,
    },

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("kernel cache: {0}")]
    Cache(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
