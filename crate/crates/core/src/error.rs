use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("matrix must have at least 2 rows, got {0}")]
    TooSmall(usize),

    #[error("negative weight a[{0}][{1}]")]
    NegativeWeight(usize, usize),

    #[error("non-finite weight a[{0}][{1}]")]
    NonFiniteWeight(usize, usize),

    #[error("row {0} sums to {1}, expected 1")]
    RowSumViolation(usize, f64),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("matrix is not symmetric: |a[{0}][{1}] - a[{1}][{0}]| exceeds tolerance")]
    NotSymmetric(usize, usize),

    #[error(
        "eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {residual:e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("dominant eigenvalue is not simple (lambda_2 = {0})")]
    DominantNotSimple(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("convergence criteria fail for gamma = {gamma} (criterion value {criterion})")]
    NotConvergent { gamma: f64, criterion: f64 },

    #[error("spectrum outside the operating range: {0}")]
    BadSpectrum(String),

    #[error("degenerate spectrum: |lambda_2 + lambda_n| = {0:e}")]
    DegenerateSpectrum(f64),

    #[error("symmetric normalization failed after {iterations} iterations (row-sum residual {residual:e})")]
    NormalizationFailed { iterations: usize, residual: f64 },

    #[error("insufficient data for a rate fit: {usable} usable points, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
