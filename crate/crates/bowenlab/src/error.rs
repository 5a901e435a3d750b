use thiserror::Error;

/// Crate-wide error type. The CLI maps each variant class to a fixed
/// process exit code, so keep the classification stable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("model rejected: {0}")]
    ModelRejected(String),
    #[error("empty subshift: {0}")]
    EmptySubshift(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("theorem check failed: {0}")]
    TheoremCheck(String),
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad model file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 input trouble, 2 a theorem-level
    /// check failed, 3 the library contradicted itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TheoremCheck(_) => 2,
            Error::InternalConsistency(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
