use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("neighborhood graph is disconnected ({} components, sizes {sizes:?})", sizes.len())]
    Disconnected { sizes: Vec<usize> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("eigensolver did not converge{}: residual {residual:.3e} after {iterations} operator applications", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Convergence {
        step: Option<usize>,
        residual: f64,
        iterations: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("diagnostic unavailable: {0}")]
    Diagnostic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Tags a convergence failure with the embedding step that produced it.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::Convergence {
                residual,
                iterations,
                ..
            } => Error::Convergence {
                step: Some(step),
                residual,
                iterations,
            },
            other => other,
        }
    }
}
