use thiserror::Error;

/// Errors surfaced by every operation in the crate.
///
/// The variants map one to one onto the CLI exit codes: `Input`,
/// `Config`, `Precondition` and `OnWall` are invalid input (2),
/// `Indeterminate` and `Budget` are undecided numerics (3).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("point lies on the wall {wall:?}")]
    OnWall { wall: Vec<i64> },
    #[error("indeterminate sign: {0}")]
    Indeterminate(String),
    #[error("search budget exhausted: {0}")]
    Budget(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
