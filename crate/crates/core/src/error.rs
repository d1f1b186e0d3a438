use num_complex::Complex64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A spectral parameter (or Bethe root) sits on or next to a singularity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A decomposition or nullspace extraction could not be completed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An operator that should commute with another does not.
    #[error("consistency failure: {0}")]
    Consistency(String),

    /// A state could not be resolved into a simultaneous eigenvector of the
    /// commuting transfer-matrix family.
    #[error("degeneracy resolution failed: {0}")]
    Degeneracy(String),

    #[error("interpolation failed: {0}")]
    Interpolation(String),

    #[error("Newton solver failed after {iterations} iterations (residual {residual:.3e}): {reason}")]
    Solver {
        reason: String,
        iterations: usize,
        residual: f64,
        best_iterate: Vec<Complex64>,
        residual_trace: Vec<f64>,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_argument_error(&self) -> bool {
        matches!(self, Error::Argument(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}
