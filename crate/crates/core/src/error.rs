use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:.6e}, error {error:.3e}, tolerance {tolerance:.3e})"
    )]
    QuadratureNonconvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hermitian eigensolver did not converge for a {0}x{0} matrix")]
    EigenNonconvergence(usize),

    #[error("eigenvalue {index} is degenerate (gap {gap:.3e})")]
    DegenerateEigenvalue { index: usize, gap: f64 },

    #[error("levels {0} and {1} are degenerate")]
    DegenerateLevels(usize, usize),

    #[error("no bracket for branch {branch}: {reason}")]
    BracketNotFound { branch: usize, reason: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("oracle sequence did not converge: {0}")]
    OracleNonconvergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonconvergence { .. }
                | Error::EigenNonconvergence(_)
                | Error::DegenerateEigenvalue { .. }
                | Error::BracketNotFound { .. }
                | Error::OracleNonconvergence(_)
        )
    }
}
