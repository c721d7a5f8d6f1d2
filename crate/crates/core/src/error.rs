//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A positive partition fraction materialized to zero examples.
    #[error("partition `{role}` has fraction {fraction} but would receive zero examples")]
    EmptyPartition { role: &'static str, fraction: f64 },

    /// Stratified splitting needs at least one example per class per
    /// non-empty partition.
    #[error("class {label} has {count} examples but the split has {partitions} non-empty partitions")]
    StratumTooSmall {
        label: i64,
        count: usize,
        partitions: usize,
    },

    /// A cell failed to parse. `row` is the 1-based data row (the header
    /// row is not counted), `col` the column name.
    #[error("row {row}, column `{col}`: cannot parse `{value}`")]
    Parse {
        row: usize,
        col: String,
        value: String,
    },

    /// The CSV header does not match the declared schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// Two datasets or distributions disagree on feature dimensionality.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Two datasets or distributions disagree on task kind.
    #[error("task mismatch: {0}")]
    TaskMismatch(String),

    /// The query set is too small to form the required bundles.
    #[error("need at least {needed} query points to build size-{n_q} bundles, got {got}")]
    NotEnoughQueries {
        needed: usize,
        n_q: usize,
        got: usize,
    },

    /// Attack training data contains only one origin label.
    #[error("attack training bundles contain a single origin class")]
    SingleClass,

    /// A group required by the inter-group statistic is absent.
    #[error("group {0} has no bundles")]
    MissingGroup(u8),

    /// A finite pool ran out of fresh examples.
    #[error("pool `{pool}` exhausted: requested {requested}, only {available} left")]
    PoolExhausted {
        pool: String,
        requested: usize,
        available: usize,
    },

    /// A sweep grid cannot support the requested analysis.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    /// A score sample violated its invariants (empty or non-finite).
    #[error("invalid score sample: {0}")]
    InvalidScores(String),

    /// A known-but-unsupported learner id.
    #[error("unsupported algorithm `{0}`")]
    UnsupportedAlgorithm(String),

    /// Catch-all for invalid configuration values.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A single run inside a multi-run experiment failed; `index` locates
    /// it within its setting.
    #[error("{setting} {index} failed: {source}")]
    Run {
        setting: &'static str,
        index: usize,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
