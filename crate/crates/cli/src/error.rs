use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("structure file line {line}: {message}")]
    PiFile { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] deformq_core::Error),
}
