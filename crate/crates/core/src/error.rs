use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Each variant maps onto one of the stable CLI exit codes through
/// [`RaclError::exit_code`].
#[derive(Debug, Error)]
pub enum RaclError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("class index {index} out of range for {num_classes} classes")]
    IndexOutOfRange { index: usize, num_classes: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical divergence at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RaclError>;

impl RaclError {
    /// Process exit code: 2 for I/O or parse failures, 3 for invalid
    /// configuration, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RaclError::Io(_) | RaclError::Parse(_) => 2,
            RaclError::Divergence { .. } => 4,
            RaclError::InvalidInput(_)
            | RaclError::IndexOutOfRange { .. }
            | RaclError::DimensionMismatch { .. }
            | RaclError::UnsupportedSize(_)
            | RaclError::InvalidConfig(_) => 3,
        }
    }
}

impl From<csv::Error> for RaclError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => RaclError::Io(io),
                other => RaclError::Parse(format!("{other:?}")),
            }
        } else {
            RaclError::Parse(e.to_string())
        }
    }
}

impl From<serde_json::Error> for RaclError {
    fn from(e: serde_json::Error) -> Self {
        RaclError::Parse(e.to_string())
    }
}

pub(crate) fn check_index(index: usize, num_classes: usize) -> Result<()> {
    if index >= num_classes {
        Err(RaclError::IndexOutOfRange { index, num_classes })
    } else {
        Ok(())
    }
}

pub(crate) fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(RaclError::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}
