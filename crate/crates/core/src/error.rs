use std::path::PathBuf;

use thiserror::Error;

use crate::device::PulseMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} literals, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("read at {volts} V would disturb the stored state (write threshold {threshold} V)")]
    ReadDisturb { volts: f64, threshold: f64 },

    #[error("endurance failure at cycle {cycle}: {mode} did not complete within {cap} pulses")]
    EnduranceFailure {
        cycle: usize,
        mode: PulseMode,
        cap: usize,
    },

    #[error("cell ({row}, {col}) is outside a {rows}x{cols} array")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("divergence update must be -1, 0 or +1, got {0}")]
    InvalidDelta(i32),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("expected one mapped automaton per TA ({expected}), got {actual}")]
    MappingMismatch { expected: usize, actual: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
