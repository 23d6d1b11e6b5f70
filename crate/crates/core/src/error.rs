use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Variants are grouped by the stage that raises them. [`Error::exit_code`]
/// maps each group onto the process exit status used by the `reuse` binary.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    // ingest
    #[error("malformed row at line {line}, column `{column}`: cannot parse {value:?}")]
    MalformedRow {
        line: u64,
        column: String,
        value: String,
    },
    #[error("irregular sampling at row {row}: {detail}")]
    IrregularSampling { row: usize, detail: String },
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("timestamp column `{0}` not found")]
    MissingTimestamp(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    // windowing
    #[error("window of {window_rows} rows does not fit a dataset of {dataset_rows} rows")]
    WindowTooLarge {
        window_rows: usize,
        dataset_rows: usize,
    },
    #[error("no candidate segment length fits at least two windows")]
    NoViableCandidate,

    // forecasting
    #[error("window {0} has no prior window to forecast from")]
    NoPriorWindow(usize),
    #[error("history too short: need at least {needed} values, got {got}")]
    HistoryTooShort { needed: usize, got: usize },

    // similarity
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("distribution contains a non-finite value")]
    NonFiniteValue,
    #[error("no candidate windows left to compare against")]
    NoCandidates,

    // learners
    #[error("need at least 2 training rows, got {0}")]
    DegenerateInput(usize),
    #[error("feature arity mismatch: model expects {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("cannot split {rows} rows into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("unsupported model format `{0}`")]
    ModelFormat(String),

    // strategies
    #[error("need at least {needed} windows, got {got}")]
    TooFewWindows { needed: usize, got: usize },
    #[error("registry has no model for window {0}")]
    RegistryMiss(usize),

    // evaluation
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cannot score an empty vector")]
    Empty,
    #[error("sample is empty")]
    EmptySample,
    #[error("negative duration: {0} s")]
    NegativeDuration(f64),
    #[error("reports cover different windows: {0}")]
    MisalignedReports(String),

    // configuration
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 data error, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::RegistryMiss(_) | Error::Json(_) => 3,
            _ => 2,
        }
    }
}
