//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by simulation, processing, and persistence.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration or input value violates a documented invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A scene query fell outside the trajectory time span.
    #[error("time {time_s} s outside trajectory span [{start_s}, {end_s}] s")]
    TimeOutsideTrajectory { time_s: f64, start_s: f64, end_s: f64 },

    /// TX and RX occupy the same point; the link geometry is undefined.
    #[error("TX and RX positions coincide at ({x}, {y}) m")]
    CoincidentPositions { x: f64, y: f64 },

    /// A system-response sample is too close to zero to divide by.
    #[error("system response sample {index} is {magnitude_db:.1} dB below the median; refusing to calibrate")]
    DegenerateSystemResponse { index: usize, magnitude_db: f64 },

    /// An operation that needs signal received an all-zero PDP.
    #[error("no signal: {0}")]
    NoSignal(&'static str),

    /// Path-loss regression cannot be performed on the given points.
    #[error("degenerate path-loss fit: {0}")]
    DegenerateFit(String),

    /// Not enough data for a statistical operation.
    #[error("not enough data: {0}")]
    NotEnoughData(String),

    /// File does not start with the snapshot-archive magic.
    #[error("{path}: not a snapshot archive (bad magic)")]
    BadMagic { path: PathBuf },

    /// Archive format version is not supported by this build.
    #[error("{path}: unsupported archive format version {found} (expected {expected})")]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },

    /// Archive payload is shorter than the header promises.
    #[error("{path}: truncated payload: expected {expected} bytes, got {actual}")]
    TruncatedPayload { path: PathBuf, expected: u64, actual: u64 },

    /// Malformed archive header or scene/campaign file.
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    /// I/O failure with path context.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach path context to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
