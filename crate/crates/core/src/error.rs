use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value overflows f64: {0}")]
    Overflow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spectral sampler unavailable for {0}")]
    SamplerUnavailable(String),

    #[error("non-finite objective value {value} at {at:?}")]
    NonFinite { value: f64, at: Vec<f64> },

    #[error("site {site} has no neighbour within radius {radius}")]
    NoNeighbour { site: usize, radius: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("all {0} replicates hit the parameter-space boundary")]
    AllExcluded(usize),

    #[error("malformed input at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
