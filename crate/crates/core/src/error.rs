use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: duplicate prefix {prefix}")]
    DuplicatePrefix { line: usize, prefix: String },

    #[error("line {line}: prefix length {length} outside 0..={max}")]
    LengthOutOfRange { line: usize, length: usize, max: usize },

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("address width {0} outside 1..=128")]
    BadAddressWidth(usize),

    #[error("database is empty")]
    EmptyDatabase,

    #[error("invalid coverage fraction {0}; expected 0 < c <= 1")]
    InvalidCoverage(String),

    #[error("entry of length {length} is longer than expansion target {target}")]
    TargetTooShort { length: usize, target: usize },

    #[error("prefix {prefix} is longer than stride coverage {coverage}")]
    PrefixExceedsCoverage { prefix: String, coverage: usize },

    #[error("invalid stride list: {0}")]
    InvalidStrides(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("overhead budget is zero; no stride combination can be accepted")]
    BudgetZero,

    #[error("level {level} has {tables} tables but only {capacity} tags and grouping is disabled")]
    TagOverflow { level: usize, tables: usize, capacity: u64 },

    #[error("pipeline capacity exceeded: short {blocks_short} TCAM blocks and {pages_short} SRAM pages")]
    CapacityExceeded { blocks_short: u64, pages_short: u64 },

    #[error("plan needs at least {needed} stages but the profile has {available}")]
    StageDepthExceeded { needed: usize, available: usize },

    #[error("overflow buffer full ({capacity} entries); reconfigure the plan")]
    OverflowFull { capacity: usize },

    #[error("prefix {0} not found")]
    NotFound(String),

    #[error("level {level} outside lean table range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
