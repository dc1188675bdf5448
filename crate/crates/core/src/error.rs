use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("sector dimension {dim} exceeds the dense cap {cap}; use the Lanczos path")]
    Capacity { dim: usize, cap: usize },

    #[error("numerical failure: {message} (best residuals: {residuals:?})")]
    Numerical {
        message: String,
        residuals: Vec<f64>,
    },

    /// The reduced state does not have the expected symmetric X form.
    #[error("structure violation: {0}")]
    Structure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sweep point j2 = {j2}: {source}")]
    SweepPoint {
        j2: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, residuals: Vec<f64>) -> Self {
        Error::Numerical {
            message: msg.into(),
            residuals,
        }
    }

    /// True for errors caused by caller input rather than numerics.
    pub fn is_argument(&self) -> bool {
        match self {
            Error::Argument(_) | Error::Capacity { .. } => true,
            Error::SweepPoint { source, .. } => source.is_argument(),
            _ => false,
        }
    }
}
