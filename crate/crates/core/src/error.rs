use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input record (gold line, annotation, notation string).
    #[error("format error: {0}")]
    Format(String),

    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Invalid configuration (budgets, ratios, policy files).
    #[error("config error: {0}")]
    Config(String),

    #[error("line {line}: invalid UTF-8")]
    Decode { line: usize },

    /// Model document failed validation.
    #[error("model load error in `{field}`: {message}")]
    Load { field: String, message: String },

    #[error("unsupported model version {found}; supported versions: {supported:?}")]
    Version { found: u32, supported: Vec<u32> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn load(field: &str, message: impl Into<String>) -> Self {
        Error::Load {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
