use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{kind} at line {line} column {column}: {message}")]
    Input { kind: &'static str, line: usize, column: usize, message: String },
    #[error("SchemaError: {0}")]
    Schema(String),
    #[error("UnknownRequest: {0}")]
    UnknownRequest(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Lib(#[from] mediankit::Error),
}

