use thiserror::Error;

/// Errors raised by the numerical layers and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ParityViolation: z-parity residual {residual:.3e} exceeds tolerance")]
    ParityViolation { residual: f64 },
    #[error("ResolutionMismatch: {0}")]
    ResolutionMismatch(String),
    #[error("InvalidResolution: {0}")]
    InvalidResolution(String),
    #[error("ZeroMode: the (0,0,0) index has no frequency")]
    ZeroMode,
    #[error("DomainError: {0}")]
    DomainError(String),
    #[error("InadmissibleMode: {0}")]
    InadmissibleMode(String),
    #[error("NonpositiveTheta: min theta = {min:.3e}")]
    NonpositiveTheta { min: f64 },
    #[error("IncompatibleRHS: mean {mean:.3e} exceeds tolerance")]
    IncompatibleRhs { mean: f64 },
    #[error("NoConvergence: {iterations} iterations, last update {update:.3e}")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("DivergenceViolation: residual {residual:.3e}")]
    DivergenceViolation { residual: f64 },
    #[error("StabilityGuard: dt = {dt:.3e} exceeds the limit {limit:.3e}")]
    StabilityGuard { dt: f64, limit: f64 },
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("Format: {0}")]
    Format(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short variant name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ParityViolation { .. } => "ParityViolation",
            Error::ResolutionMismatch(_) => "ResolutionMismatch",
            Error::InvalidResolution(_) => "InvalidResolution",
            Error::ZeroMode => "ZeroMode",
            Error::DomainError(_) => "DomainError",
            Error::InadmissibleMode(_) => "InadmissibleMode",
            Error::NonpositiveTheta { .. } => "NonpositiveTheta",
            Error::IncompatibleRhs { .. } => "IncompatibleRHS",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DivergenceViolation { .. } => "DivergenceViolation",
            Error::StabilityGuard { .. } => "StabilityGuard",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Format(_) => "Format",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
