use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point cloud needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("inconsistent dimensions: expected {expected}, found {found} at index {index}")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        index: usize,
    },

    #[error("timestamps must be strictly increasing (violated at index {0})")]
    NonMonotoneTime(usize),

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("degenerate SSM: all entries are identical")]
    DegenerateSsm,

    #[error("degenerate trace: zero standard deviation ({0})")]
    DegenerateTrace(String),

    #[error("no shift to scale noise against")]
    NoShift,

    #[error("trajectory passes through receiver {0}; radial direction undefined")]
    ThroughReceiver(String),

    #[error("neighbor graph is disconnected")]
    Disconnected,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown motion class {0:?}")]
    UnknownClass(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("{context}: {inner}")]
    Context { context: String, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            inner: Box::new(self),
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
