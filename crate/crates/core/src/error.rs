use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    /// One or more parameter bounds violated. Every violation is listed.
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error(
        "population of {actual} is too small for {strategy}: at least {required} members needed"
    )]
    PopulationTooSmall {
        strategy: &'static str,
        required: usize,
        actual: usize,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row} has {actual} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        actual: usize,
    },

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: empty label")]
    EmptyLabel { row: usize },

    #[error("dataset has {rows} usable rows, at least 2 required")]
    EmptyDataset { rows: usize },

    #[error("dataset has a single class `{0}`, at least 2 required")]
    SingleClass(String),

    #[error("feature `{0}` has zero variance, z-score undefined")]
    ZeroVariance(String),

    #[error("feature `{0}` has no observed values to impute from")]
    NoObservedValues(String),

    #[error("label index {label} out of range for {classes} output classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("unsupported model schema version {found}, expected {expected}")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("trace output failed: {0}")]
    Trace(#[source] io::Error),

    #[error("generation {generation}: {source}")]
    Generation {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
