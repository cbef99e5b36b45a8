use thiserror::Error;

/// Errors raised by the signal pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal has {0} samples, at least 2 are required")]
    EmptySignal(usize),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid step {dt} s (signal span {span} s)")]
    InvalidStep { dt: f64, span: f64 },

    #[error("input too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("degenerate signal: {0}")]
    DegenerateSignal(&'static str),

    #[error("signal carries no power")]
    SilentSignal,

    #[error("class {0} is degenerate (zero variance in every feature)")]
    DegenerateClass(u8),

    #[error("class {0} has no samples")]
    MissingClass(u8),

    #[error("degenerate class layout: {0}")]
    DegenerateClasses(&'static str),

    #[error("training labels are degenerate: {0}")]
    DegenerateLabels(&'static str),

    #[error("training set is empty")]
    EmptyTrain,

    #[error("class {label} has {count} samples, fewer than {splits} folds")]
    ClassTooSmall { label: u8, count: usize, splits: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than a
    /// runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
