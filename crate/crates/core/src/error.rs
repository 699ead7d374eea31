use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("channel mismatch: expected {expected}, got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("region does not fit in a grid of halfwidth {halfwidth}; needs halfwidth {required}")]
    RegionExceedsWindow { halfwidth: usize, required: usize },

    #[error("shape grids have mixed halfwidths ({0} vs {1})")]
    MixedHalfwidths(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("ground-truth region {0} is empty")]
    EmptyGroundTruthRegion(u32),

    #[error("empty ground-truth boundary")]
    EmptyGroundTruthBoundary,

    #[error("empty superpixel boundary")]
    EmptySuperpixelBoundary,

    #[error("need at least 2 regions, got {0}")]
    TooFewRegions(usize),

    #[error("no adjacent region pairs")]
    NoAdjacentRegions,

    #[error("compression model has no entry for label {0}")]
    MissingRegion(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("CSV row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches the offending file to the error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
