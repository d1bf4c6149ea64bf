use std::path::PathBuf;

/// Errors shared across the crate. Variants are named after the failure they
/// report so callers can match on them without string inspection.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing view image: {0}")]
    MissingView(PathBuf),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("corrupt descriptor: {0}")]
    CorruptDescriptor(String),

    #[error("i/o failure at {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected}, found {found}")]
    BadMagic { expected: String, found: String },

    #[error("bad scale line: {0}")]
    BadScale(String),

    #[error("truncated payload: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },

    #[error("angular dimension must be odd, got {0}")]
    EvenAngularDim(usize),

    #[error("degenerate prediction: variance {0} too small for an affine fit")]
    DegeneratePrediction(f64),

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("too few views: need angular_cols >= 3, got {0}")]
    TooFewViews(usize),

    #[error("row {row} out of bounds for height {height}")]
    RowOutOfBounds { row: usize, height: usize },

    #[error("index out of bounds: {0}")]
    IndexOutOfBounds(String),

    #[error("degenerate angular grid: need at least 2 views per angular axis, got {rows}x{cols}")]
    DegenerateAngularGrid { rows: usize, cols: usize },

    #[error("non-finite data: {0}")]
    NonFiniteData(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
