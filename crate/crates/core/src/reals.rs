//! Real and complex points of the completed rational line.
//!
//! Every operation is a [`MapRep`] on the line or its square, applied to
//! the argument points. Multiplication is only uniformly continuous on
//! bounded sets, so it takes an explicit bound that is certified before
//! the map is applied.

use std::fmt;

use thiserror::Error;

use crate::ball::FormalBall;
use crate::completion::{pair_point, CompletionPoint};
use crate::maps::{MapClass, MapError, MapRep, Modulus};
use crate::metric::{Product, RationalLine};
use crate::numeric::{pow2_neg, sqrt_bounds, Extended, Scalar, UpperReal};

/// The square of the line with the max metric.
pub type Plane<S> = Product<RationalLine<S>, RationalLine<S>>;

/// Effort spent certifying multiplication bounds when none is given.
pub const BOUND_EFFORT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealError {
    #[error("|x| < {bound} is refuted: stage value {stage} at stage {n}")]
    BoundViolation { bound: String, stage: String, n: u32 },
    #[error("|x| < {bound} not certified within effort {effort}")]
    Uncertified { bound: String, effort: u32 },
    #[error(transparent)]
    Map(#[from] MapError),
}

fn line<S: Scalar>() -> RationalLine<S> {
    RationalLine::new()
}

fn plane<S: Scalar>() -> Plane<S> {
    Product::new(line(), line())
}

fn binary<S, F>(f: F, modulus: Modulus<S>, class: MapClass, label: &str) -> MapRep<Plane<S>, RationalLine<S>>
where
    S: Scalar,
    F: Fn(&S, &S) -> S + Send + Sync + 'static,
{
    MapRep::from_point_map(plane(), line(), move |(a, b): &(S, S)| f(a, b), modulus, class).with_label(label)
}

fn unary<S, F>(f: F, class: MapClass, label: &str) -> MapRep<RationalLine<S>, RationalLine<S>>
where
    S: Scalar,
    F: Fn(&S) -> S + Send + Sync + 'static,
{
    MapRep::from_point_map(line(), line(), f, Modulus::identity(), class).with_label(label)
}

/// `(a, b) -> a + b`; 2-Lipschitz for the max metric.
pub fn add_map<S: Scalar>() -> MapRep<Plane<S>, RationalLine<S>> {
    binary(|a, b| a.clone() + b.clone(), Modulus::linear(S::from_frac(1, 2)), MapClass::Uniform, "add")
}

pub fn sub_map<S: Scalar>() -> MapRep<Plane<S>, RationalLine<S>> {
    binary(|a, b| a.clone() - b.clone(), Modulus::linear(S::from_frac(1, 2)), MapClass::Uniform, "sub")
}

pub fn max_map<S: Scalar>() -> MapRep<Plane<S>, RationalLine<S>> {
    binary(|a, b| a.clone().max(b.clone()), Modulus::identity(), MapClass::Metric, "max")
}

pub fn min_map<S: Scalar>() -> MapRep<Plane<S>, RationalLine<S>> {
    binary(|a, b| a.clone().min(b.clone()), Modulus::identity(), MapClass::Metric, "min")
}

/// `(a, b) -> a * b` with both arguments clamped to `[-bound, bound]`,
/// restricted to the open square of half-width `bound`.
pub fn mul_map<S: Scalar>(bound: u32) -> MapRep<Plane<S>, RationalLine<S>> {
    let b = S::from_int(bound.max(1) as i64);
    let clamp = {
        let b = b.clone();
        move |x: &S| x.clone().max(-b.clone()).min(b.clone())
    };
    let slope = S::one() / (b.clone() * S::from_int(2));
    binary(move |x, y| clamp(x) * clamp(y), Modulus::linear(slope), MapClass::Uniform, "mul")
        .with_region(FormalBall { center: (S::zero(), S::zero()), radius: b })
}

pub fn neg_map<S: Scalar>() -> MapRep<RationalLine<S>, RationalLine<S>> {
    unary(|a: &S| -a.clone(), MapClass::Isometric, "neg")
}

pub fn abs_map<S: Scalar>() -> MapRep<RationalLine<S>, RationalLine<S>> {
    unary(|a: &S| a.abs(), MapClass::Metric, "abs")
}

/// A point of the real line.
#[derive(Clone)]
pub struct RealPoint<S: Scalar>(CompletionPoint<RationalLine<S>>);

impl<S: Scalar> RealPoint<S> {
    pub fn constant(q: S) -> Self {
        RealPoint(CompletionPoint::of_carrier(line(), q))
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(S::from_int(n))
    }

    pub fn from_point(p: CompletionPoint<RationalLine<S>>) -> Self {
        RealPoint(p)
    }

    pub fn point(&self) -> &CompletionPoint<RationalLine<S>> {
        &self.0
    }

    /// A rational within `2^-n` (strictly) of the point.
    pub fn approx(&self, n: u32) -> S {
        self.0.stage(n + 1)
    }

    /// Two-sided enclosure `[approx - 2^-n, approx + 2^-n]`.
    pub fn enclosure(&self, n: u32) -> (S, S) {
        let a = self.approx(n);
        let w = pow2_neg::<S>(n);
        (a.clone() - w.clone(), a + w)
    }

    pub fn distance(&self, other: &Self) -> UpperReal<S> {
        self.0.distance(&other.0).expect("real points share the line")
    }

    fn binary(&self, other: &Self, map: &MapRep<Plane<S>, RationalLine<S>>) -> Result<Self, RealError> {
        Ok(RealPoint(map.apply(&pair_point(&self.0, &other.0))?))
    }

    fn unary(&self, map: &MapRep<RationalLine<S>, RationalLine<S>>) -> Self {
        RealPoint(map.apply(&self.0).expect("total metric map on the line"))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.binary(other, &add_map()).expect("addition is total")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.binary(other, &sub_map()).expect("subtraction is total")
    }

    pub fn neg(&self) -> Self {
        self.unary(&neg_map())
    }

    pub fn abs(&self) -> Self {
        self.unary(&abs_map())
    }

    pub fn max(&self, other: &Self) -> Self {
        self.binary(other, &max_map()).expect("max is total")
    }

    pub fn min(&self, other: &Self) -> Self {
        self.binary(other, &min_map()).expect("min is total")
    }

    /// Certifies `|self| < bound` by searching stages `0..=effort`.
    pub fn certify_bound(&self, bound: &S, effort: u32) -> Result<(), RealError> {
        for n in 0..=effort {
            let x = self.0.stage(n).abs();
            let r = pow2_neg::<S>(n);
            if x.clone() + r.clone() < *bound {
                return Ok(());
            }
            if x.clone() - r >= *bound {
                return Err(RealError::BoundViolation { bound: bound.to_string(), stage: x.to_string(), n });
            }
        }
        Err(RealError::Uncertified { bound: bound.to_string(), effort })
    }

    /// Product of two points both certified below `bound` in absolute
    /// value at effort [`BOUND_EFFORT`].
    pub fn mul(&self, other: &Self, bound: u32) -> Result<Self, RealError> {
        self.mul_with_effort(other, bound, BOUND_EFFORT)
    }

    pub fn mul_with_effort(&self, other: &Self, bound: u32, effort: u32) -> Result<Self, RealError> {
        let b = S::from_int(bound as i64);
        self.certify_bound(&b, effort)?;
        other.certify_bound(&b, effort)?;
        self.binary(other, &mul_map(bound))
    }
}

impl<S: Scalar> fmt::Debug for RealPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPoint(~{})", self.approx(16))
    }
}

/// A point of the complex plane as a pair of real points.
#[derive(Clone, Debug)]
pub struct ComplexPoint<S: Scalar> {
    pub re: RealPoint<S>,
    pub im: RealPoint<S>,
}

impl<S: Scalar> ComplexPoint<S> {
    pub fn new(re: RealPoint<S>, im: RealPoint<S>) -> Self {
        ComplexPoint { re, im }
    }

    pub fn constant(re: S, im: S) -> Self {
        Self::new(RealPoint::constant(re), RealPoint::constant(im))
    }

    pub fn zero() -> Self {
        Self::constant(S::zero(), S::zero())
    }

    pub fn one() -> Self {
        Self::constant(S::one(), S::zero())
    }

    pub fn i() -> Self {
        Self::constant(S::zero(), S::one())
    }

    /// Componentwise readout, each within `2^-n`.
    pub fn approx(&self, n: u32) -> (S, S) {
        (self.re.approx(n), self.im.approx(n))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.re.add(&other.re), self.im.add(&other.im))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.re.sub(&other.re), self.im.sub(&other.im))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    /// Multiplication by a Gaussian rational.
    pub fn scale(&self, re: &S, im: &S) -> Self {
        let c = Self::constant(re.clone(), im.clone());
        let bound = gaussian_bound(re, im).max(self.bound_hint());
        self.mul(&c, bound).expect("bound covers both factors")
    }

    /// A natural strictly above both component magnitudes.
    pub fn bound_hint(&self) -> u32 {
        let (a, b) = self.approx(2);
        let m = a.abs().max(b.abs()) + S::one();
        let c = m.ceil();
        c.to_string().parse::<u32>().unwrap_or(u32::MAX / 4) + 1
    }

    /// `(a + bi)(c + di)` with every component below `bound`. The real
    /// products are bounded by `bound` each, so the sums stay within
    /// `2 * bound^2` and need no further certificate.
    pub fn mul(&self, other: &Self, bound: u32) -> Result<Self, RealError> {
        let ac = self.re.mul(&other.re, bound)?;
        let bd = self.im.mul(&other.im, bound)?;
        let ad = self.re.mul(&other.im, bound)?;
        let bc = self.im.mul(&other.re, bound)?;
        Ok(Self::new(ac.sub(&bd), ad.add(&bc)))
    }

    /// Enclosure `lo <= |z| <= hi` with width below `2^-(n-1)`.
    pub fn modulus_bounds(&self, n: u32) -> (S, S) {
        let k = n + 2;
        let (a, b) = self.approx(k);
        let (lo, hi) = sqrt_bounds(&(a.clone() * a + b.clone() * b), k);
        // the readout is within sqrt(2) * 2^-k < 2^-(n+1) in the euclidean norm
        let err = pow2_neg::<S>(n + 1);
        let lo = (lo - err.clone()).max(S::zero());
        (lo, hi + err)
    }

    /// `|z|` as an upper real, from the upper end of
    /// [`modulus_bounds`](Self::modulus_bounds).
    pub fn modulus(&self) -> UpperReal<S> {
        let z = self.clone();
        UpperReal::from_bounds(move |n| Extended::Finite(z.modulus_bounds(n).1))
    }

    /// Certified lower bound on `|z|` at readout precision `n`.
    pub fn modulus_lower(&self, n: u32) -> S {
        self.modulus_bounds(n).0
    }
}

fn gaussian_bound<S: Scalar>(re: &S, im: &S) -> u32 {
    let m = (re.abs().max(im.abs()) + S::one()).ceil();
    m.to_string().parse::<u32>().unwrap_or(u32::MAX / 4) + 1
}
