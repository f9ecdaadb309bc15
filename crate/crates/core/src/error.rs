use thiserror::Error;

/// Errors raised by the solver library.
///
/// Every variant carries a stable machine-readable code (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "invalid model parameters: {constraint} (beta={beta}, mu={mu}, delta={delta}, rho={rho})"
    )]
    InvalidParams {
        constraint: &'static str,
        beta: f64,
        mu: f64,
        delta: f64,
        rho: f64,
    },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("release vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams { .. } => "invalid_params",
            Error::InvalidArgument { .. } => "invalid_argument",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidSchedule(_) => "invalid_schedule",
        }
    }

    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::arg(name, format!("must be >= 0, got {value}")));
    }
    Ok(())
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value <= 0.0 {
        return Err(Error::arg(name, format!("must be > 0, got {value}")));
    }
    Ok(())
}
