use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Best estimate recovered from a run that diverged.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialEstimate {
    pub x_a: Vec<Complex64>,
    pub x_v: Vec<f64>,
    pub sweeps_used: usize,
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite message in sweep {sweep} at coefficient {index}")]
    Divergence {
        sweep: usize,
        index: usize,
        partial: Option<Box<PartialEstimate>>,
    },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
