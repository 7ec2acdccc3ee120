use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav error: {0}")]
    Wav(String),

    #[error("unsupported sample rate {found} Hz (expected {expected} Hz)")]
    SampleRate { expected: u32, found: u32 },

    #[error("signal of {len} samples is shorter than one frame ({frame_len})")]
    SignalTooShort { len: usize, frame_len: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("LSTSC requires >= 2 microphones (got {0})")]
    TooFewMicrophones(usize),

    #[error("mask value {value} at frame {frame}, bin {bin} is outside [0, 1]")]
    MaskOutOfRange { frame: usize, bin: usize, value: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("scene constraints unsatisfied after {0} attempts")]
    SamplingBudgetExhausted(usize),

    #[error("decay range not reached")]
    DecayRangeNotReached,

    #[error("stem '{name}' has {len} samples, clip needs {needed}")]
    StemTooShort { name: String, len: usize, needed: usize },

    #[error("missing RIR for source {source_index}, mic {mic}")]
    MissingRir { source_index: usize, mic: usize },

    #[error("feature file error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
