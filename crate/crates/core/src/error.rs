use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("negative off-diagonal rate {value} at row {row}, column {col}")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 0")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("target assigns zero mass to state {state}")]
    ZeroTargetMass { state: usize },
    #[error("generator is not irreducible")]
    NotIrreducible,
    #[error("generator is not reversible (max detailed-balance defect {defect:e})")]
    NotReversible { defect: f64 },
    #[error("convex weight {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("spectral gap is zero")]
    ZeroGap,
    #[error("state {state} cannot reach the target set")]
    UnreachableTarget { state: usize },
    #[error("Laplace parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("commute time needs two distinct states")]
    SameState,
    #[error("sets overlap at state {state}")]
    OverlappingSets { state: usize },
    #[error("state set is empty")]
    EmptySet,
    #[error("state {state} out of range for {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("mixing-time search did not converge below epsilon by t = {horizon}")]
    NoConvergence { horizon: f64 },
    #[error("not a birth-death generator: {0}")]
    NotBirthDeath(String),
    #[error("Laplace argument must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("observable is not mean-zero under the target (mean {mean:e})")]
    NotMeanZero { mean: f64 },
    #[error("target is not stationary for the generator (residual {residual:e})")]
    NotStationary { residual: f64 },
    #[error("linear system is singular or ill-conditioned (residual {residual:e})")]
    SingularSystem { residual: f64 },
    #[error("distribution has zero mass at state {state}; use the closed form or the point-mass limit")]
    DegenerateSupport { state: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("validation failed for {what} at index {index}: deviation {deviation:e}")]
    ValidationFailure {
        what: &'static str,
        index: usize,
        deviation: f64,
    },
}
