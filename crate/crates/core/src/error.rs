use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ShipError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ShipError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// The shapelet cannot be placed inside the unpadded region of the instance.
    #[error("shapelet of length {shapelet_len} does not fit an instance of original length {original_length}")]
    ShapeletTooLong {
        shapelet_len: usize,
        original_length: usize,
    },

    #[error("channel {channel} out of range for {channels} channels")]
    ChannelOutOfRange { channel: usize, channels: usize },

    #[error("invalid series `{id}`: {reason}")]
    InvalidSeries { id: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series of length {len} is too short for k = {k} PIPs")]
    TooFewPoints { len: usize, k: usize },

    #[error("no shapelet of class {0} in the pool")]
    NoShapeletForClass(String),

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("non-finite input to the classification head")]
    NonFiniteInput,

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl ShipError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ShipError::Io {
            path: path.into(),
            source,
        }
    }
}
