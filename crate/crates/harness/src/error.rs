use std::io;

use pme_core::PmeError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("step {step}: {source}")]
    Solver { step: usize, source: PmeError },
    #[error(transparent)]
    Core(#[from] PmeError),
    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(&'static str),
    #[error("mesh file: {0}")]
    MeshFormat(String),
}
