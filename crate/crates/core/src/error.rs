use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("conjugate saturated at lambda = {lambda}, j = {j}: the sequence truncation is too short")]
    Saturation { lambda: f64, j: usize },

    #[error("construction failed at p = {p}: {reason}")]
    Construction { p: usize, reason: String },

    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {format} input: {message}")]
    Parse { format: &'static str, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
