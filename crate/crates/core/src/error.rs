use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate coefficient index {0}")]
    DuplicateIndex(i64),

    #[error("{samples} samples cannot resolve bandlimit {bandlimit} (need at least {})", 2 * bandlimit + 1)]
    Aliasing { samples: usize, bandlimit: usize },

    #[error("symbol must be supported on n < 0, found coefficient at {0}")]
    NotCoanalytic(i64),

    #[error("symbol must be supported on n >= 0, found coefficient at {0}")]
    NotAnalytic(i64),

    #[error("|lambda| = {modulus} is outside the closed unit disc")]
    LambdaOutsideDisc { modulus: f64 },

    #[error("operation requires |lambda| = 1, got {modulus}")]
    NotUnimodular { modulus: f64 },

    #[error("operation requires |lambda| < 1, got {modulus}")]
    NotInOpenDisc { modulus: f64 },

    #[error("operation requires real lambda in (0, 1), got {re}{im:+}i")]
    NotInUnitInterval { re: f64, im: f64 },

    #[error("dilation factor |c| = {modulus} exceeds 1")]
    DilationOutsideDisc { modulus: f64 },

    #[error("truncation size must be positive")]
    EmptyTruncation,

    #[error("{size}x{size} dense truncation needs {needed_mb} MB, budget is {budget_mb} MB")]
    MemoryBudget {
        size: usize,
        needed_mb: u64,
        budget_mb: u64,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("corner mismatch: first_row[0] = {row} but first_col[0] = {col}")]
    CornerMismatch {
        row: crate::Complex,
        col: crate::Complex,
    },

    #[error("singular value decomposition failed for N = {0}")]
    Svd(usize),

    #[error("tolerance {0} must lie in (0, 1)")]
    InvalidTolerance(f64),

    #[error("grid size must be positive")]
    EmptyGrid,

    #[error("sampled multiplier reaches |tau| = {0}, kernel is singular on the torus")]
    SingularKernel(f64),

    #[error("malformed symbol JSON at line {line}, column {column}: {message}")]
    SymbolFormat {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed CSV at line {line}: {message}")]
    CsvFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
