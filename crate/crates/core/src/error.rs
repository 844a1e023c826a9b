use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Inputs that do not fit together, such as vectors of different lengths.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An exhaustive search would exceed its configured bound.
    #[error("resource bound exceeded: {what} needs {size} steps, bound is {bound}")]
    Resource { what: String, size: String, bound: u128 },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn resource(what: impl Into<String>, size: impl ToString, bound: u128) -> Self {
        Error::Resource { what: what.into(), size: size.to_string(), bound }
    }
}
