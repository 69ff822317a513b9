use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },
    #[error("positivity lost: {0}")]
    Positivity(String),
    #[error("linear solve stagnated after {iterations} iterations (relative residual {residual:e})")]
    LinearStagnation { iterations: usize, residual: f64 },
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("hypergeometric series did not converge within {terms} terms")]
    SeriesNonConvergence { terms: usize },
    #[error("bubble extraction failed: {0}")]
    Extraction(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("continuation failed after last good p = {last_good_p}: {reason}")]
    Continuation { last_good_p: f64, reason: String },
    #[error("eigen-iteration stagnated; partial singular values {partial:?}")]
    ProbeStagnation { partial: Vec<f64> },
    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
