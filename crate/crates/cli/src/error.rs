use framelab::FrameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config at {}: {message}", if pointer.is_empty() { "/" } else { pointer.as_str() })]
    Validation { pointer: String, message: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
}
