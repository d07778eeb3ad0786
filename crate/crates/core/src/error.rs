use thiserror::Error;

/// Errors raised across the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The character series could not be truncated within `max_terms`.
    #[error("truncation error: {terms} terms retained, tail bound {tail_bound:e} exceeds tolerance")]
    Truncation { terms: usize, tail_bound: f64 },

    /// A function produced a non-finite value during integration.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A least-squares design matrix is rank deficient.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
