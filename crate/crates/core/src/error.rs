use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inadmissible potential: {0}")]
    InadmissiblePotential(String),

    #[error("truncation domain inadequate: {0}")]
    InadequateDomain(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("relative entropy diverges: reference density vanishes at x = {x} where rho = {rho}")]
    DivergentEntropy { x: f64, rho: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("under-powered test: {0}")]
    UnderPowered(String),

    #[error("malformed container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
