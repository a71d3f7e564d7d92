use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e} > {tol:.1e})")]
    NonHermitian { deviation: f64, tol: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e} < -{tol:.1e})")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("operator is not a projector (defect {defect:.3e})")]
    NotProjector { defect: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {dim} exceeds the configured maximum {max_dim}")]
    DimensionOverflow { dim: u128, max_dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{what} requires {required} units of work, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("operation requires an exact-mode averaging context")]
    ExactModeRequired,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("eigendecomposition failed to converge")]
    Eigendecomposition,

    #[error("ensemble file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
