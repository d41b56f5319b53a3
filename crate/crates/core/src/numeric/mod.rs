//! Exact scalars and upper reals.

mod scalar;
mod upper;

pub use scalar::{
    half, midpoint, pow2, pow2_neg, round_down_dyadic, round_up_dyadic, sqrt_bounds,
    to_decimal, Scalar,
};
pub use upper::{Answer, Extended, UpperReal};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("query bound must be positive, got {0}")]
    NonPositiveQuery(String),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(String),
}
