use thiserror::Error;

pub type Result<T> = std::result::Result<T, NdcwtError>;

#[derive(Debug, Error)]
pub enum NdcwtError {
    #[error("unknown filter `{name}`; available filters: {available}")]
    UnknownFilter { name: String, available: String },

    #[error("filter `{name}` violates {invariant}: {detail}")]
    InvalidFilter {
        name: String,
        invariant: &'static str,
        detail: String,
    },

    #[error("depth {depth} exceeds ceil(log2({len})) = {max}")]
    DepthTooLarge { depth: usize, len: usize, max: usize },

    #[error("depth must be at least 1")]
    DepthTooSmall,

    #[error("signal of length {len} is shorter than the {taps}-tap filter")]
    SignalTooShort { len: usize, taps: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("no diagonal blocks exist for shift {shift}")]
    ShiftOutOfRange { shift: i32 },

    #[error("spectrum fit needs at least 2 usable levels, found {found}")]
    InsufficientLevels { found: usize },

    #[error("Hurst exponent {0} must lie strictly inside (0, 1)")]
    InvalidHurst(f64),

    #[error("circulant embedding is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    EmbeddingFailed { min_eigenvalue: f64 },

    #[error("{rows}x{cols} exceeds the exact 2-D simulation limit of {limit} points")]
    SizeLimit { rows: usize, cols: usize, limit: usize },

    #[error("class {0} has no training vectors")]
    EmptyClass(usize),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
