use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error("all-zero field cannot be max-normalized")]
    ZeroField,

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("simulation diverged at step {step}")]
    Divergence { step: usize },

    #[error("homology dimension {0} is not supported (only 0 and 1)")]
    UnsupportedDimension(usize),

    #[error("unknown density family '{0}'")]
    UnknownFamily(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
