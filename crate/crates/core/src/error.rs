use thiserror::Error;

/// Errors raised by the narrow escape toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NekError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Point outside the region where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),

    /// Point outside the injectivity region of a boundary chart.
    #[error("chart error: {0}")]
    Chart(String),

    #[error("quadrature failed to converge: {message} (partial estimate {partial_estimate}, error estimate {error_estimate})")]
    QuadratureFailure {
        message: String,
        partial_estimate: f64,
        error_estimate: f64,
    },

    #[error("not configured: {0}")]
    NotConfigured(String),

    /// Asymptotic formula evaluated outside its range of validity.
    #[error("out of validity: {0}")]
    OutOfValidity(String),

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("no path was absorbed ({censored} censored)")]
    NoAbsorption { censored: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = NekError> = std::result::Result<T, E>;
