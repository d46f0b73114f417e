use std::path::PathBuf;

/// Errors produced anywhere in the ingest → preprocess → train → forecast chain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: no header terminator line `{terminator}` found")]
    MissingHeaderTerminator { path: PathBuf, terminator: String },

    #[error("{path}:{line_no}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line_no: usize,
        reason: String,
    },

    #[error("{path}:{line_no}: gps_time does not increase strictly")]
    NonMonotonicTime { path: PathBuf, line_no: usize },

    #[error("{path}: file holds no data records")]
    NoRecords { path: PathBuf },

    #[error("series is empty")]
    EmptyInput,

    #[error("series of length {len} is too short: {reason}")]
    TooShort { len: usize, reason: String },

    #[error("scaler is degenerate (zero range); cannot transform")]
    DegenerateScale,

    #[error("stage `{stage}` cannot follow {history:?}")]
    StageOrder { stage: String, history: Vec<String> },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} training pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },

    #[error("seed window has length {got}, model look-back is {expected}")]
    BadWindowLength { expected: usize, got: usize },

    #[error("scaler passed to evaluation differs from the one the model was trained with")]
    ScalerMismatch,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
