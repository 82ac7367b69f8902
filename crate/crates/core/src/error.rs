use thiserror::Error;

/// Errors raised by the rate engine and its oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid protocol: {0}")]
    Protocol(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid security budget: {0}")]
    Budget(String),

    #[error("invalid matrix: {0}")]
    Matrix(String),

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("no positive key rate found for N up to {limit:e}")]
    NoPositiveRate { limit: f64 },

    #[error("report I/O: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QkdError>;

pub(crate) fn domain<T>(name: &'static str, value: f64, expected: &'static str) -> Result<T> {
    Err(QkdError::Domain {
        name,
        value,
        expected,
    })
}
