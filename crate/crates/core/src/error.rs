use thiserror::Error;

/// Errors produced by body construction, geometry kernels and checks.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad JSON body, zero generator, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Vector length does not match the body's ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// No exact algorithm is available for this body (too many dimensions,
    /// too many generators, unsupported variant).
    #[error("capability error: {0}")]
    Capability(String),

    /// A documented precondition of a check does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capability(msg.into()))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
