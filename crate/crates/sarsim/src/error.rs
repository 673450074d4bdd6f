//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("point ({x:.3}, {y:.3}) is outside the grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("point ({x:.3}, {y:.3}) is not in known free space")]
    NotFree { x: f64, y: f64 },

    #[error("robot {0} is not registered")]
    UnknownRobot(usize),

    #[error("pose-graph vertex {0} does not exist")]
    UnknownVertex(usize),

    #[error("invalid vertex range {first}..{last}")]
    InvalidVertexRange { first: usize, last: usize },

    #[error("a task tree is already rooted on pose-graph vertex {0}")]
    DuplicateRoot(usize),

    #[error("pose graph has no vertices")]
    EmptyPoseGraph,

    #[error("non-finite pose")]
    NonFinitePose,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line, msg: msg.into() }
    }
}
