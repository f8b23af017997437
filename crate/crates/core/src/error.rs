use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("width {width} is outside the gate depth table range [{min}, {max}]")]
    WidthOutOfRange { width: usize, min: usize, max: usize },

    #[error("invalid gate depth table: {0}")]
    InvalidTable(String),

    #[error("invalid depth ratio alpha = {0} (must be finite and positive)")]
    InvalidAlpha(f64),

    #[error("invalid block width m = {m} for n = {n} (need 2 <= m < n)")]
    InvalidBlockWidth { n: usize, m: usize },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("cannot parse sequence {text:?}: {reason} (near {token:?})")]
    Parse {
        text: String,
        token: String,
        reason: String,
    },

    #[error("width mismatch: {0}")]
    WidthMismatch(String),

    #[error("success probability {0} is outside (0, 1]; the schedule is infeasible")]
    ZeroProbability(f64),

    #[error("search space is empty: {0}")]
    Infeasible(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bisection did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
