use thiserror::Error;

/// Errors raised by the algebra, spectral and measurement routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a non-invertible ring element")]
    ZeroDivision,
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },
    #[error("operator is not a physical observable: {reason}")]
    NotPhysical { reason: String },
    #[error("{which} is not a physical observable: {reason}")]
    NotPhysicalInput { which: String, reason: String },
    #[error("no eigenvalue group matches {0}")]
    UnknownEigenvalue(f64),
    #[error("operators do not commute (max residual {residual:e})")]
    NotCommuting { residual: f64 },
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("hidden-variable weights sum to {0}, expected 1")]
    WeightSumInvalid(f64),
    #[error("invalid color model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDivision => "ZeroDivision",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::RingMismatch { .. } => "RingMismatch",
            Error::NotPhysical { .. } => "NotPhysical",
            Error::NotPhysicalInput { .. } => "NotPhysicalInput",
            Error::UnknownEigenvalue(_) => "UnknownEigenvalue",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::DegenerateState(_) => "DegenerateState",
            Error::WeightSumInvalid(_) => "WeightSumInvalid",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    pub(crate) fn not_physical(reason: impl Into<String>) -> Self {
        Error::NotPhysical {
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
