use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("size limit exceeded: {what} needs {needed} states, cap is {cap}")]
    SizeLimit { what: &'static str, needed: usize, cap: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("generator is not reversible (detailed-balance residual {0:.3e})")]
    NotReversible(f64),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    /// Model or configuration file problem; `location` names the line and/or field.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Converts a TOML syntax error into a [`Error::Parse`] carrying `line:column`.
pub fn from_toml_error(source: &str, err: &toml::de::Error) -> Error {
    let location = match err.span() {
        Some(span) => {
            let (line, col) = line_col(source, span.start);
            format!("line {line}, column {col}")
        }
        None => "document".to_string(),
    };
    Error::Parse { location, message: err.message().to_string() }
}

fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

pub(crate) fn field(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: format!("field `{}`", path.into()), message: message.into() }
}
