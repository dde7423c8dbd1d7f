use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell width must be 32 or 64 bits, got {0}")]
    InvalidCellWidth(u32),

    #[error("counter width {alpha} is not in 1..={beta}")]
    InvalidCounterWidth { alpha: u32, beta: u32 },

    #[error("counter index {index} out of range for {eta} counters per cell")]
    CounterIndexOutOfRange { index: u32, eta: u32 },

    #[error("counter value {value} exceeds maximum {max}")]
    CounterValueTooLarge { value: u64, max: u64 },

    #[error("index modulus must be non-zero (x={x}, y={y}, eta={eta})")]
    ZeroModulus { x: u64, y: u64, eta: u64 },

    #[error("expected item count must be at least 1")]
    ZeroItems,

    #[error("false positive rate must lie in (0, 1), got {0}")]
    InvalidFalsePositiveRate(f64),

    #[error("prime index {index} for q={q} is too small to offset by 3")]
    DimensionsTooSmall { q: u64, index: usize },

    #[error("invalid dimensions {x}x{y}: {reason}")]
    InvalidDimensions { x: u64, y: u64, reason: &'static str },

    #[error("hash function count must be at least 1")]
    ZeroHashCount,

    #[error("seed list has {got} entries, expected {expected}")]
    SeedCount { expected: usize, got: usize },

    #[error("seed list contains duplicate seed {0:#018x}")]
    DuplicateSeed(u64),

    #[error("malformed snapshot: {0}")]
    Snapshot(&'static str),

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown {what} `{value}`")]
    UnknownName { what: &'static str, value: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
