use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    /// Work would exceed a configured budget.
    #[error("capacity exceeded: {what} needs {needed}, budget is {budget}")]
    Capacity {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
