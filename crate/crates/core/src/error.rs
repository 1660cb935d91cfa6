use thiserror::Error;

/// Error type shared across the crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("jet operation on mismatched anchor points")]
    BaseMismatch,
    #[error("reciprocal of a jet with zero value")]
    DivisionByZeroJet,
    #[error("point has non-finite coordinates")]
    NonFinitePoint,
    #[error("duplicate point ({0}, {1})")]
    DuplicatePoint(f64, f64),
    #[error("empty Whitney field")]
    EmptyField,
    #[error("jet has infinite nonnegative excess")]
    InfiniteExcess,
    #[error("data values must be nonnegative")]
    NegativeData,
    #[error("norm bound M must be nonnegative")]
    NegativeBound,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("affine constraint is infeasible")]
    InfeasibleConstraint,
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("problem too large for exact enumeration (d = {0}, limit {1})")]
    EnumerationTooLarge(usize, usize),
    #[error("instance has {0} points, exceeding the cap {1}")]
    TooManyPoints(usize, usize),
    #[error("x_sharp pin must not be a data point")]
    PinIsDataPoint(f64, f64),
    #[error("query point ({0}, {1}) lies outside the dilated square")]
    QueryOutsideSquare(f64, f64),
    #[error("subdivision did not terminate near ({0}, {1}); raise A1 or check data scale")]
    SubdivisionStalled(f64, f64),
    #[error("coincident projection abscissas in square (k={0}, i={1}, j={2}); raise A1")]
    CoincidentAbscissas(i16, i64, i64),
    #[error("decomposition build assertion failed: {0}")]
    BuildAssertion(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input parse error: {0}")]
    Parse(String),
    #[error("data file does not match the index: {0}")]
    DataMismatch(String),
    #[error("index file is corrupt or has the wrong version: {0}")]
    BadIndexFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
