use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("degenerate pose: {0}")]
    DegeneratePose(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error("invalid cache: {0}")]
    InvalidCache(String),
    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error in field `{field}`: {reason}")]
    Parse { field: &'static str, reason: String },
    #[error("unknown sensor type `{0}`")]
    UnknownSensor(String),
    #[error("encode error: {0}")]
    Encode(String),
    #[error("out-of-order event for {sensor}: {got} ms after {last} ms")]
    OutOfOrder {
        sensor: &'static str,
        last: u64,
        got: u64,
    },
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Parse {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(line: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            line,
            reason: reason.into(),
        }
    }
}
