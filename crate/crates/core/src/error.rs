use thiserror::Error;

use crate::tree::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown node id {0:?}")]
    UnknownNode(NodeId),
    #[error("node {0:?} has not been expanded")]
    NotExpanded(NodeId),
    #[error("backpropagation path is empty")]
    EmptyPath,
    #[error("cannot search from a terminal state")]
    TerminalState,
    #[error("illegal action {action}: {reason}")]
    IllegalAction { action: usize, reason: String },
    #[error("{done} completed iterations exceed the budget {budget}")]
    BudgetExceeded { done: u32, budget: u32 },
    #[error("virtual counts total {total} does not match budget {budget}")]
    CountMismatch { total: u32, budget: u32 },
    #[error("no policy snapshot recorded at iteration {0}")]
    MissingSnapshot(u32),
    #[error("policy support is empty")]
    EmptyPolicy,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("evaluator failed: {0}")]
    Evaluator(String),
    #[error("state is too large to solve exhaustively (more than {limit} positions)")]
    TooLarge { limit: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
