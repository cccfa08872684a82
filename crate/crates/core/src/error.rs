use thiserror::Error;

use crate::grid::GridVertex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map parse error at line {line}: {msg}")]
    MapParse { line: usize, msg: String },

    #[error("scenario parse error at line {line}: {msg}")]
    ScenarioParse { line: usize, msg: String },

    #[error("vertex {0} is outside the grid")]
    OutOfBounds(GridVertex),

    #[error("vertex {0} has no traversable incident tile")]
    Unreachable(GridVertex),

    #[error("vertex {0} is not a convex corner")]
    NotConvexCorner(GridVertex),

    #[error("graph format error: {0}")]
    Format(String),

    #[error("invalid generator spec: {0}")]
    GenSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
