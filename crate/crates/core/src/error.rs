use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("block count mismatch: expected {expected}, found {found}")]
    BlockCount { expected: usize, found: usize },

    #[error("a product point needs at least one block")]
    NoBlocks,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid {kind} set: {reason}")]
    InvalidSet { kind: &'static str, reason: String },

    #[error("{kind} sets do not support {operation}")]
    Unsupported {
        kind: &'static str,
        operation: &'static str,
    },

    #[error("block {block} of the initial point lies outside its set")]
    Infeasible { block: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("instance too large for brute force: {0}")]
    TooLarge(String),

    #[error("refused: {0}")]
    Refused(String),
}
