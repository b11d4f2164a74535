use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown method `{name}`; available: {}", available.join(", "))]
    UnknownMethod { name: String, available: Vec<String> },

    #[error("invalid method: {0}")]
    InvalidMethod(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular implicit stage {stage}: |1 - z·g| = {modulus:e}")]
    Singular { stage: usize, modulus: f64 },

    #[error("newton iteration did not converge after {iterations} iterations (last correction norm {residual:e})")]
    NewtonFailure { iterations: usize, residual: f64 },

    #[error("inner solver failure: {0}")]
    InnerSolver(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
