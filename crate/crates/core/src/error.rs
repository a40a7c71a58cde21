use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the calibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing manifest: {0}")]
    MissingManifest(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("payload shape mismatch: manifest declares {expected} values, payload holds {found}")]
    PayloadShape { expected: usize, found: usize },

    #[error("unknown channel label `{0}`")]
    UnknownChannel(String),

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("epoch window [{start}, {end}) exceeds recording bounds for cue at sample {cue}")]
    WindowOutOfBounds { cue: usize, start: i64, end: i64 },

    #[error("no cue events match the requested classes")]
    NoMatchingEvents,

    #[error("no resting block in recording of subject {0}")]
    NoRestingBlock(String),

    #[error(
        "resting segment {segment} lasts {actual_s:.3} s, outside {nominal_s} s +/- {slack_s} s"
    )]
    RestingDuration {
        segment: &'static str,
        actual_s: f64,
        nominal_s: f64,
        slack_s: f64,
    },

    #[error("requested {requested_s} s but segment only holds {available_s} s")]
    DurationExceedsSegment { requested_s: f64, available_s: f64 },

    #[error("invalid filter specification: {0}")]
    InvalidFilter(String),

    #[error("signal too short: {0}")]
    SignalTooShort(String),

    #[error("non-finite sample in input")]
    NonFinite,

    #[error("feature layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {0} missing or has fewer than the required rows")]
    MissingClass(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fold held out {held_out}, condition {condition}: {source}")]
    Fold {
        held_out: String,
        condition: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
