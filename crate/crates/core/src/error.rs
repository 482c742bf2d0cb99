use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid coefficient `{name}`: {reason}")]
    InvalidCoefficient { name: &'static str, reason: String },

    #[error("tabulated kernel has no total mass; supply `gbar` or mark it infinite")]
    UnknownMass,

    #[error("kernel has infinite total mass; hypothesis (H1) cannot hold")]
    InfiniteMass,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("time {t} is outside the recorded history [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("need at least {needed} samples, got {got}")]
    Arity { needed: usize, got: usize },

    #[error("mu2 = {mu2} exceeds mu1 = {mu1}; the decay theorem requires mu2 <= mu1")]
    OutsideTheorem { mu1: f64, mu2: f64 },

    #[error("structural condition violated: {0}")]
    Structural(String),

    #[error("hypothesis (H1) violated: lambda = delta - gbar = {lambda} <= 0")]
    H1Violation { lambda: f64 },

    #[error("input error: {0}")]
    Input(String),

    #[error("step-size error: {0}")]
    StepSize(String),

    #[error("divergence detected after t = {last_finite_t}")]
    Divergence { last_finite_t: f64 },

    #[error("fit domain error: {0}")]
    FitDomain(String),

    #[error("undefined ratio: energy is zero on every recorded row")]
    UndefinedRatio,

    #[error("constant selection failed: brace `{brace}` = {value}")]
    SelectionFailure { brace: String, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
