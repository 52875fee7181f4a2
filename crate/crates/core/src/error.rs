use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dataset has no columns")]
    NoColumns,

    #[error("empty cell has undefined sparsity")]
    EmptyCell,

    #[error("degenerate subcube (zero-length interval on coordinate {0})")]
    DegenerateSubcube(usize),

    #[error("invalid attribute spec for column {column}: {reason}")]
    InvalidAttribute { column: usize, reason: String },

    #[error("value out of domain at row {row}, column {column}: {reason}")]
    OutOfDomain {
        row: usize,
        column: usize,
        reason: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("idLength undefined with duplicates")]
    DuplicatePoints,

    #[error("point is not a member of the dataset")]
    NotAMember,

    #[error("dimension {d} exceeds oracle limit {limit}")]
    DimensionTooLarge { d: usize, limit: usize },

    #[error("use forest, oracle infeasible (d = {0})")]
    OracleInfeasible(usize),

    #[error("more cells than points (k = {k}, m = {m})")]
    TooManyCells { k: usize, m: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no usable attributes")]
    NoUsableAttributes,

    #[error("AUC undefined: labels contain a single class")]
    SingleClass,

    #[error("series shorter than window ({len} < {width})")]
    SeriesTooShort { len: usize, width: usize },

    #[error("csv row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("unsupported version {found} (expected {expected})")]
    UnsupportedVersion { found: String, expected: u32 },

    #[error("malformed model document: {0}")]
    MalformedModel(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
