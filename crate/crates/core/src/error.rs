//! Error type shared across the pipeline.
//!
//! Every failure carries enough context to act on: schema errors name the
//! column, classification errors quote the offending value, data-volume
//! errors report the counts involved. The CLI maps variants onto exit codes
//! via [`Error::exit_code`].

use std::path::PathBuf;

use crate::types::PitchCategory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: field `{field}` has unparseable value `{value}`")]
    Malformed {
        row: u64,
        field: &'static str,
        value: String,
    },

    #[error("unknown pitch description `{0}`")]
    UnknownDescription(String),

    #[error("degenerate strike zone: sz_top {top} is not above sz_bot {bot}")]
    DegenerateZone { top: f64, bot: f64 },

    #[error("feature `{0}` is constant across the training set; cannot standardize")]
    ConstantFeature(&'static str),

    #[error("cannot fit scaler on {0} training records; need at least 2")]
    TooFewRecords(usize),

    #[error("category {category}: index holds {available} records but k={k} were requested")]
    InsufficientNeighbors {
        category: PitchCategory,
        available: usize,
        k: usize,
    },

    #[error("no index available for category {0}")]
    MissingIndex(PitchCategory),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("config validation failed:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("index file {path}: {reason}")]
    IndexFormat { path: PathBuf, reason: String },

    #[error("player name `{name}` is ambiguous in external stats; candidate ids: {ids:?}")]
    AmbiguousName { name: String, ids: Vec<i64> },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 usage/config, 2 data/schema, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) => 1,
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
