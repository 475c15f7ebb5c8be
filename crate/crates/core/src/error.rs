use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed record #{index}: {reason}")]
    MalformedRecord { index: usize, reason: String },

    #[error("packet count overflow aggregating ({source_id}, {destination_id})")]
    Overflow {
        source_id: String,
        destination_id: String,
    },

    #[error("schema error: column `{column}` {reason}")]
    Schema { column: String, reason: String },

    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
