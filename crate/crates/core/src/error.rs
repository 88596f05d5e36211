use alloc::string::String;

use crate::model::ValidationReport;

/// Errors produced by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Parameters violate one or more model invariants.
    #[error("invalid DCMM parameters: {0}")]
    InvalidParams(ValidationReport),

    /// An off-diagonal entry of `Ω` is not a valid Bernoulli probability.
    #[error("Ω[{i},{j}] = {value} is not below 1")]
    OverflowProbability { i: usize, j: usize, value: f64 },

    /// A probability matrix handed to the sampler has an entry outside `[0, 1)`.
    #[error("entry ({i},{j}) = {value} is outside [0, 1)")]
    InvalidProbability { i: usize, j: usize, value: f64 },

    /// Dimensions of two inputs disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Generic malformed input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Node index outside `0..n`.
    #[error("node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    /// The graph has no edges (`V = 0`).
    #[error("graph has no edges")]
    DegenerateGraph,

    /// Matrix forms exist only for triangles and quadrilaterals.
    #[error("order {0} is not supported here (expected 3 or 4)")]
    UnsupportedOrder(usize),

    /// The brute-force enumeration would be too expensive.
    #[error("brute force over n = {n}, m = {m} exceeds the enumeration guard")]
    TooLarge { n: usize, m: usize },

    /// `‖η̂‖² − 1 ≤ 0`; the normalized statistics are undefined.
    #[error("nuisance estimate ‖η̂‖² − 1 = {0} is not positive")]
    NonpositiveNuisance(f64),

    /// Argument outside the domain of a numeric routine.
    #[error("argument {0} outside the domain")]
    DomainError(f64),

    /// `Ω` (or `1′Ω1`) is zero.
    #[error("matrix is zero")]
    ZeroMatrix,

    /// The eigensolver failed to converge.
    #[error("eigen-decomposition did not converge")]
    EigenFailure,

    /// A quantity requiring `K ≥ 2` was requested for a null model.
    #[error("operation needs K ≥ 2")]
    NullModel,

    /// A fixed-point iteration hit its cap.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A construction's precondition does not hold.
    #[error("condition violated: {0}")]
    ConditionViolated(String),

    /// No admissible (nonnegative) solution was found.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A log-space accumulation left the representable range.
    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),
}

pub type Result<T> = core::result::Result<T, Error>;
