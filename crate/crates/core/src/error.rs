use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("index {index} outside 0..={max}")]
    IndexOutOfRange { index: i64, max: usize },

    #[error("duplicate agent {0} in one round")]
    DuplicateAgent(u64),

    #[error("bundle of {0} servers exceeds the enumeration bound of 20; split the bundle or reduce the won set")]
    BundleTooLarge(usize),

    #[error("invalid market configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bid curve left (0, varpi] at r = {r}: b = {value}")]
    CurveOutOfRange { r: f64, value: f64 },

    #[error("non-finite value in bid curve at r = {r}")]
    NonFinite { r: f64 },

    #[error("stage-two solve failed at gamma = {gamma}: {source}")]
    Sweep { gamma: f64, source: Box<Error> },

    #[error("grid mismatch between analytic model and simulation")]
    GridMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
