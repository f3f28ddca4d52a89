use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {msg}")]
    Parse { path: PathBuf, row: usize, msg: String },

    #[error("{0}: no entries")]
    NoEntries(PathBuf),

    #[error("{path}: row {row}: duplicate name {name:?}")]
    DuplicateName { path: PathBuf, row: usize, name: String },

    #[error("{path}: row {row}: expected {expected} embedding values, found {found}")]
    Dimension {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("perplexity {perplexity} must be below N-1 = {limit}")]
    Perplexity { perplexity: f64, limit: usize },

    #[error("invalid t-SNE parameter: {0}")]
    TsneParam(String),

    #[error("bandwidth search did not converge for point {index} ({name})")]
    Bandwidth { index: usize, name: String },

    #[error("missing price for category {0:?}")]
    MissingPrice(String),

    #[error("missing aspect for category {0:?}")]
    MissingAspect(String),

    #[error("palette separation of {min_distance} not achieved after {attempts} attempts")]
    Separation { min_distance: f64, attempts: usize },

    #[error("invalid palette: {0}")]
    InvalidPalette(String),

    #[error("unknown category id {0}")]
    UnknownCategory(usize),

    #[error("image {path}: {msg}")]
    Image { path: PathBuf, msg: String },

    #[error("latent dimension mismatch: expected {expected}, got {got}")]
    LatentDim { expected: usize, got: usize },

    #[error("grid size mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    GridSize {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("external generator: {0}")]
    External(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
