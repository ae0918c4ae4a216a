use std::fmt;

/// Every failure the engine reports.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("valuation is hidden below the precision floor {prec}")]
    IndeterminateValuation { prec: i64 },
    #[error("division by an exact zero series")]
    DivisionByZero,
    #[error("composition requires an inner series of the form z + O(1), got valuation {0}")]
    CompositionDomain(String),
    #[error("matrix is singular{0}")]
    SingularMatrix(String),
    #[error("insufficient order: {0}")]
    InsufficientOrder(String),
    #[error("not a state: zeroth moment is {0}, expected 1")]
    NotAState(String),
    #[error("unknown preset law {0:?}")]
    UnknownPreset(String),
    #[error("parse error at byte {pos}: expected {expected}")]
    Parse { pos: usize, expected: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entry ({row}, {col}) is not affine")]
    NotAffine { row: usize, col: usize },
    #[error("a0 is singular over the rational function field")]
    SingularA0,
    #[error("fixed-point iteration stopped gaining precision at floor {floor} after {iterations} iterations")]
    NonContractive { iterations: usize, floor: i64 },
    #[error("series is not summable at the working floor: {0}")]
    NotSummable(String),
    #[error("operator dimension {dim} exceeds the cap {cap}")]
    DepthOverflow { dim: usize, cap: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("nothing found within {0}")]
    NotFoundWithin(usize),
    #[error("divisor is not monic")]
    NotMonic,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("no annihilator found: {0}")]
    NotFound(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn dims(what: impl fmt::Display) -> Error {
        Error::DimensionMismatch(what.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
