//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("singular error model: {0}")]
    SingularModel(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid quantile: {0}")]
    InvalidQuantile(String),
    #[error("calibration mismatch: {0}")]
    Calibration(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Calibration(_) => 3,
            Error::Parse { .. } | Error::Json(_) => 4,
            Error::Resolution(_) => 5,
            _ => 2,
        }
    }
}

pub(crate) fn config<S: Into<String>>(msg: S) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn range<S: Into<String>>(msg: S) -> Error {
    Error::Range(msg.into())
}
