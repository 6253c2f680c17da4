use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Each variant maps onto one CLI exit code through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: unknown link ids, bad file contents, violated preconditions.
    #[error("input error: {0}")]
    Input(String),
    /// A numeric argument outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An exhaustive routine refused a problem above its configured size cap.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Random generation could not satisfy its constraints.
    #[error("generation error: {0}")]
    Generation(String),
    /// An internal invariant did not hold. Always a bug or a broken guarantee.
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// 0 success, 1 input error, 2 capacity error, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Domain(_) | Error::Io(_) | Error::Json(_) => 1,
            Error::Capacity(_) | Error::Generation(_) => 2,
            Error::Invariant(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
