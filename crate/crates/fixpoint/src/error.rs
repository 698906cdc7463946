use thiserror::Error;

/// Failure to read one of the supported text formats.
#[derive(Debug, Error)]
pub enum FormatError {
    /// Malformed input; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unsupported Matrix Market variant `{what}`")]
    Unsupported { line: usize, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            message: message.into(),
        }
    }

    /// 1-based line of the failure, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            FormatError::Parse { line, .. } | FormatError::Unsupported { line, .. } => Some(*line),
            FormatError::Io(_) => None,
        }
    }
}
