use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate the positivity requirements on diffusivities,
    /// yields and feeds.
    #[error("invalid parameters (A1): {0}")]
    InvalidParams(String),

    #[error("invalid kinetics: {0}")]
    InvalidKinetics(String),

    #[error("grid mismatch: expected {expected} nodes, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
