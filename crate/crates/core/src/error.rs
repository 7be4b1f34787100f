use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable context mismatch: {0}")]
    Context(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("substitution order: {0}")]
    Order(String),
    #[error("budget exhausted in {stage}: {detail}")]
    Budget { stage: String, detail: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
