use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A user-supplied value violates a documented precondition.
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("singular matrix in {context}")]
    Singular { context: &'static str },

    #[error("shear workspace is stale: built for {built}, used with {requested}")]
    StaleWorkspace { built: String, requested: String },

    #[error(
        "eigenvalue iteration did not converge after {iterations} iterations ({converged} of {dim} eigenvalues found)"
    )]
    NotConverged {
        iterations: usize,
        converged: usize,
        dim: usize,
        /// Eigenvalues deflated before the iteration limit was hit.
        partial: Vec<num_complex::Complex64>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (singularity, non-convergence) as
    /// opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NotConverged { .. })
    }
}
