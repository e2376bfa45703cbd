use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series must have at least 2 observations, got {0}")]
    SeriesTooShort(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("simulation exploded at step {step} (value {value:e})")]
    Explosion { step: usize, value: f64 },

    #[error("unstable autoregressive polynomial: companion spectral radius {spectral_radius} >= 1")]
    Unstable { spectral_radius: f64 },

    #[error("{operation} has no closed form for the {family} family")]
    UnsupportedFamily {
        family: &'static str,
        operation: &'static str,
    },

    #[error("lag {lag} out of range for a series of length {n}")]
    LagOutOfRange { lag: usize, n: usize },

    #[error("invalid bandwidth: {0}")]
    Bandwidth(String),

    #[error("unknown window {0:?} (expected parzen, tukey-hanning or bartlett)")]
    UnknownWindow(String),

    #[error("window {0} is not locally quadratic at the origin (no c2 constant)")]
    NotLocallyQuadratic(&'static str),

    #[error("window {0} can produce negative spectral estimates")]
    NegativeSpectralWindow(&'static str),

    #[error("degenerate pilot spectrum at ordinate {index}: {value:e} <= floor {floor:e}")]
    DegeneratePilot { index: usize, value: f64, floor: f64 },

    #[error("reference spectrum must be positive, got {value:e} at frequency {frequency}")]
    NonPositiveReference { frequency: f64, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("Kronecker power dimension {dimension} exceeds the limit {limit}")]
    SizeLimit { dimension: usize, limit: usize },

    #[error("simulation budget {requested} exceeds the limit {limit}")]
    Budget { requested: usize, limit: usize },

    #[error("{kind} needs at least {min} replications, got {got}")]
    InsufficientReplications {
        kind: &'static str,
        got: usize,
        min: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
