//! Crate-wide error type.
//!
//! Public operations return `Result` instead of panicking on contract
//! violations so the CLI can map failures onto stable exit codes:
//! configuration/usage problems exit 2, numeric aborts exit 3 and a failed
//! gradient check exits 4.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Dimension disagreement between two objects; names both shapes.
    #[error("shape mismatch in {op}: {left} vs {right}")]
    ShapeMismatch {
        op: &'static str,
        left: String,
        right: String,
    },

    /// A caller-supplied value violates an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A NaN or infinity surfaced where the numerics must stay finite.
    /// `what` names the first offending tensor.
    #[error("non-finite value in {what} during {op}")]
    NonFinite { what: String, op: String },

    /// A word that is not part of the command vocabulary.
    #[error("unknown {kind} {word:?}; valid {kind}s: {valid}")]
    UnknownWord {
        kind: &'static str,
        word: String,
        valid: String,
    },

    /// An unknown plot kind requested from the analysis exporter.
    #[error("unknown plot kind {given:?}; valid kinds: {valid}")]
    UnknownPlotKind { given: String, valid: String },

    /// Checkpoint/config disagreement, corrupt checkpoint, wrong magic, ...
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Malformed data file (CSV or manifest).
    #[error("corrupt data file {path}: {reason}")]
    CorruptData { path: PathBuf, reason: String },

    /// Filesystem error decorated with the path that failed.
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Configuration file rejected (unknown key, bad value, bad JSON).
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code the CLI uses for this error: 2 for usage/config problems,
    /// 3 for numeric aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. } => 3,
            _ => 2,
        }
    }
}
