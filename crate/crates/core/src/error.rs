use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (header layout, length prior, window plan, experiment).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every forward metric vanished at some trellis stage.
    #[error("decode failure: all forward metrics are zero at stage {stage}")]
    DecodeFailure { stage: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
