use crate::sim::RunTranscript;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{context}: expected dimension {expected}, got {got}")]
    DimMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("tape does not match network parameters")]
    StaleTape,

    #[error("non-finite gradient encountered in {context}")]
    NanGradient { context: &'static str },

    #[error("non-finite loss encountered at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },

    #[error("insufficient results: need {needed}, got {got} ({missing} missing)")]
    InsufficientResults {
        needed: usize,
        got: usize,
        missing: usize,
    },

    #[error("invalid interpolation nodes: {0}")]
    InvalidNodes(String),

    #[error("decode failure: {survivors} of {needed} required workers survived")]
    DecodeFailure {
        survivors: usize,
        needed: usize,
        transcript: Box<RunTranscript>,
    },

    #[error("sampler gave up after {retries} retries: {reason}")]
    ResampleExhausted { retries: usize, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for insufficient worker results.
    pub fn insufficient(needed: usize, got: usize) -> Self {
        Error::InsufficientResults {
            needed,
            got,
            missing: needed.saturating_sub(got),
        }
    }
}
