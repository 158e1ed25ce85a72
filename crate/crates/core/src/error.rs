use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid radius: {0}")]
    InvalidRadius(String),

    #[error("variable signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("invalid exponent vector: {0}")]
    InvalidExponent(String),

    #[error("direction {direction} out of range for {nvars} variables")]
    DirectionOutOfRange { direction: usize, nvars: usize },

    #[error("connection is not integrable: curvature in directions ({i}, {j}) is nonzero")]
    NotIntegrable { i: usize, j: usize },

    #[error("depth {requested} exceeds the cap {cap}")]
    DepthCap { requested: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coordinate {index} is not a unit")]
    NonUnitCoordinate { index: usize },

    #[error("input polynomial is zero")]
    ZeroInput,
}
