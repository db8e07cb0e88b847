use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants are split roughly into input problems (bad topology, bad config,
/// malformed files) and runtime failures (numerics, I/O). The CLI maps the
/// former to a distinct exit code through [`Error::is_config`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("no route from node {src} to node {dst}")]
    Unreachable { src: usize, dst: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid traffic: {0}")]
    Traffic(String),

    #[error("schedule has {got} entries but the topology has {expected} links")]
    DecisionLength { expected: usize, got: usize },

    #[error("episode is terminal; call reset before stepping again")]
    Terminal,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{context}: {msg}")]
    Parse { context: String, msg: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("non-finite loss at update {update}")]
    NonFiniteLoss { update: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, msg: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            msg: msg.to_string(),
        }
    }

    /// True for errors caused by user input rather than by a failure while running.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Topology(_)
                | Error::Unreachable { .. }
                | Error::Traffic(_)
                | Error::Dimension { .. }
                | Error::Config(_)
                | Error::Parse { .. }
                | Error::Checkpoint(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
