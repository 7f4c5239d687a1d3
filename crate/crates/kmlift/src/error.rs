use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no even unimodular lattice of signature ({b},2): need b > 2 and b = 2 mod 8")]
    Signature { b: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("majorant is not positive definite")]
    NotPositiveDefinite,
    #[error("zero vector has no divisors")]
    ZeroVector,
    #[error("expected a positive integer, got {0}")]
    NotPositive(i64),
    #[error("index {index} out of range 1..={max}")]
    Index { index: usize, max: usize },
    #[error("invalid tube point: {0}")]
    TubePoint(String),
    #[error("KAN solve failed: {0}")]
    Kan(String),
    #[error("isometry does not fix the base plane z0 (defect {0:.3e})")]
    NotInStabilizer(f64),
    #[error("isometry does not map z to z0 (defect {0:.3e})")]
    WrongPlane(f64),
    #[error("matrix is not an isometry (defect {0:.3e})")]
    NotIsometry(f64),
    #[error("matrix is not in SL2(Z)")]
    NotSl2z,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
