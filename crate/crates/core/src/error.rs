use thiserror::Error;

/// Errors raised by the codecs, the channel model, and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("iteration {iteration} outside combining table of length {len}")]
    IterationOutOfRange { iteration: usize, len: usize },
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("a combining table is required for decoder {0}")]
    MissingLut(String),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("threshold search could not bracket: {0}")]
    BracketFailure(String),
    #[error("inconsistent window: {0}")]
    InconsistentWindow(String),
    #[error("config: {0}")]
    Config(String),
    #[error("lut file: {0}")]
    LutFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
