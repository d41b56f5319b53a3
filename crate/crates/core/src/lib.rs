//! Executable formal-ball calculus for metric locales.
//!
//! Distances live in the upper reals, opens of a completion are finite
//! unions of formal balls, points are regular Cauchy sequences, and maps
//! between completions are carrier maps with a modulus certificate. On top
//! of that the crate provides exact real and complex arithmetic, the
//! presented locale of metric maps, and a checker for Gelfand duality on
//! finite discrete spaces.
//!
//! Everything is generic over an exact [`Scalar`]; the aliases below fix
//! it to arbitrary-precision rationals.

pub mod ball;
pub mod completion;
pub mod expr;
pub mod function_locale;
pub mod gelfand;
pub mod laws;
pub mod maps;
pub mod metric;
pub mod numeric;
pub mod reals;
pub mod report;
pub mod schema;

pub use numeric::{Answer, Extended, NumericError, Scalar, UpperReal};

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;

/// The rational line over [`Rational`].
pub type Line = metric::RationalLine<Rational>;

/// A point of the completed line over [`Rational`].
pub type Real = reals::RealPoint<Rational>;

/// A complex point over [`Rational`].
pub type Complex = reals::ComplexPoint<Rational>;
