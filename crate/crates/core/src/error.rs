use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge (best residual {best_residual:.3e})")]
    EigNonConverged { best_residual: f64 },

    #[error("{method} reached its iteration cap of {cap} (best residual {best:.3e})")]
    IterationCap {
        method: &'static str,
        cap: usize,
        best: f64,
    },

    #[error("time limit reached")]
    TimeLimit,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("size guardrail: {0}")]
    TooLarge(String),
}
