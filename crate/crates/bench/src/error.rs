use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Core(#[from] inclusion_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed csv: {0}")]
    Csv(String),
}

impl BenchError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        BenchError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
