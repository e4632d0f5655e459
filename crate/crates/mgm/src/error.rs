use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("singular matrix: pivot {pivot} below threshold")]
    SingularMatrix { pivot: usize },

    #[error("zero or missing diagonal at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("stencil at point {center} is not unisolvent: {reason}")]
    NonUnisolventStencil { center: usize, reason: String },

    #[error("transfer stencil for fine point {fine} is singular (coincident coarse points?)")]
    SingularTransfer { fine: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate points at indices {first} and {second}")]
    DuplicatePoints { first: usize, second: usize },

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap an error with the hierarchy level it occurred on.
    pub fn at_level(self, level: usize) -> Error {
        Error::Level {
            level,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
