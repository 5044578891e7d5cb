use thiserror::Error;

/// Failures raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("cannot choose {requested} points from a window of {size}")]
    EmptyDomain { requested: usize, size: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("orthogonality lost at index {index} (residual {residual:.3e})")]
    Precision { index: usize, residual: f64 },

    #[error("sigma is not positive at interior point {point}")]
    Admissibility { point: f64 },

    #[error("eigenvalue {eigenvalue} lies within the gap band of threshold {threshold}")]
    AmbiguousProjection { eigenvalue: f64, threshold: f64 },

    #[error("shift {shift} is not inside the spectral gap ({lower}, {upper})")]
    Shift { shift: f64, lower: f64, upper: f64 },

    #[error("operator and kernel do not commute (commutator {commutator:.3e})")]
    Compatibility { commutator: f64 },

    #[error("operator norm {norm} exceeds 1")]
    Contraction { norm: f64 },

    #[error("{modes} modes exceeds the ceiling of {limit}")]
    Ceiling { modes: usize, limit: usize },

    #[error("row {row} sums to 1 {deviation:+.3e}; widen the window")]
    Truncation { row: String, deviation: f64 },

    #[error("window certificate failed: {0}")]
    Window(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("eigensolver did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
