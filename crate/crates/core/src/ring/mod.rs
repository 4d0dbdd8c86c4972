//! Exact coordinate arithmetic: Q(λ) for a real algebraic λ > 1 in one dimension, rationals otherwise.

mod element;
mod expansion;
mod interval;
pub mod matrix;
mod poly;

pub use element::{MinimalPolynomial, Ring, RingElement, Sign, MAX_RING_DEGREE};
pub use expansion::{ExpansionMap, EXPANSION_MARGIN};
pub use interval::Interval;
pub use matrix::{spectral_radius, PerronEstimate};
pub use poly::{IntPoly, RatPoly};

use num_bigint::BigInt;
use num_rational::BigRational;

/// A coordinate vector.
pub type Point = Vec<RingElement>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RingError {
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("the rational ring has no generator")]
    NoGenerator,
    #[error("cannot parse polynomial: {0}")]
    PolyParse(String),
    #[error("invalid minimal polynomial: {0}")]
    InvalidMinpoly(String),
    #[error("reducible minimal polynomial: {poly} = ({left})·({right})")]
    Reducible {
        poly: String,
        left: String,
        right: String,
    },
    #[error("invalid root bracket: {0}")]
    InvalidBracket(String),
    #[error("ring degree {0} exceeds the supported maximum")]
    DegreeTooLarge(usize),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix has a negative entry")]
    NegativeEntry,
    #[error("map is not expansive (smallest eigenvalue modulus {0})")]
    NotExpansive(f64),
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
