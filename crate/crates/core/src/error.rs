use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),

    #[error("field has nonzero mean {0:e}; the inverse Laplacian is undefined")]
    NonzeroMean(f64),

    #[error("eigensolver did not converge on a {dim}x{dim} matrix:\n{dump}")]
    Eigensolver { dim: usize, dump: String },

    #[error("Newton iteration diverged after {iterations} steps (last iterate {last})")]
    NewtonDivergence { iterations: usize, last: Complex64 },

    #[error("Newton iteration stagnated; residual history {history:?}")]
    NewtonStagnation { history: Vec<f64> },

    #[error("non-finite state encountered at step {step}")]
    NonFinite { step: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid field data: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigensolver { .. }
                | Error::NewtonDivergence { .. }
                | Error::NewtonStagnation { .. }
                | Error::NonFinite { .. }
                | Error::Numerical(_)
        )
    }
}
