use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("bad magic: expected BKT1")]
    BadMagic,

    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    #[error("truncated tensor: {0}")]
    Truncated(String),

    #[error("malformed tensor: {0}")]
    Malformed(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("image codec: {0}")]
    Image(#[from] ::image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::NonFinite(_))
    }
}
