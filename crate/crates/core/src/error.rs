use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::PlayerId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row at line {line}: {detail}")]
    MalformedRow { line: u64, detail: String },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("duplicate key: {0}")]
    DuplicateKey(String),
    #[error("non-positive market value {value} at line {line}")]
    NonPositiveValue { line: u64, value: f64 },
    #[error("unknown position label `{0}`")]
    UnknownPosition(String),
    #[error("player {0} has no birth date")]
    MissingBirthDate(PlayerId),
    #[error("record violates schema invariant at line {line}: {detail}")]
    InvariantViolation { line: u64, detail: String },
    #[error("no player is present in all three datasets")]
    EmptyJoin,
    #[error("player {0} has no playing time in the aggregation window")]
    NoPlayingTime(PlayerId),
    #[error("feature table `{0}` has no rows")]
    EmptyTable(String),
    #[error("impurity of an empty target set")]
    EmptyTargets,
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("node importance requested for a leaf")]
    LeafNode,
    #[error("no tree contains a split")]
    NoSplits,
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("{n} samples cannot be split into {k} folds")]
    TooFewSamples { n: usize, k: usize },
    #[error("rankings do not cover the same item set: {0}")]
    ItemSetMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, printed on the diagnostic stream by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::UnknownColumn(_) => "UnknownColumn",
            Error::MissingColumn(_) => "MissingColumn",
            Error::DuplicateKey(_) => "DuplicateKey",
            Error::NonPositiveValue { .. } => "NonPositiveValue",
            Error::UnknownPosition(_) => "UnknownPosition",
            Error::MissingBirthDate(_) => "MissingBirthDate",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::EmptyJoin => "EmptyJoin",
            Error::NoPlayingTime(_) => "NoPlayingTime",
            Error::EmptyTable(_) => "EmptyTable",
            Error::EmptyTargets => "EmptyTargets",
            Error::NonFiniteInput => "NonFiniteInput",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::LeafNode => "LeafNode",
            Error::NoSplits => "NoSplits",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::ItemSetMismatch(_) => "ItemSetMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
