use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("symbol is not elliptic: {0}")]
    NotElliptic(String),
    #[error("symbol is not invertible at mu = {mu:?}")]
    NotInvertible { mu: Vec<f64> },
    #[error("insufficient expansion: {0}")]
    InsufficientExpansion(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("malformed input at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 1,
            Error::NonConvergence(_) => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), msg: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
