//! Upper reals: numbers known only through rational strict upper bounds.
//!
//! An [`UpperReal`] is a point of the locale of upper reals with values in
//! `[0, +inf]`. It is queried with "is the value below `q`?", which can only
//! ever be confirmed, never refuted.

use std::fmt;
use std::ops::Add;
use std::sync::{Arc, Mutex};

use serde::{Serialize, Serializer};

use super::{NumericError, Scalar};

/// Outcome of a semi-decision. `Yes` is final; `NotYet` only means the
/// question is undetermined at the effort spent so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Answer {
    Yes,
    NotYet,
}

impl Answer {
    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::NotYet
        }
    }

    pub fn and(self, other: Answer) -> Answer {
        Answer::from_bool(self.is_yes() && other.is_yes())
    }

    pub fn or(self, other: Answer) -> Answer {
        Answer::from_bool(self.is_yes() || other.is_yes())
    }
}

/// A scalar or `+inf`. Ordered with every finite value below `Infinity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Extended<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> Extended<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(s) => Some(s),
            Extended::Infinity => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// Strict comparison against a finite scalar.
    pub fn lt(&self, q: &S) -> bool {
        match self {
            Extended::Finite(s) => s < q,
            Extended::Infinity => false,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        match self {
            Extended::Finite(s) => Extended::Finite(s.clone() * c.clone()),
            Extended::Infinity => Extended::Infinity,
        }
    }
}

impl<S: Scalar> Add for Extended<S> {
    type Output = Extended<S>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinity,
        }
    }
}

impl<S: Scalar> fmt::Display for Extended<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(s) => write!(f, "{s}"),
            Extended::Infinity => f.write_str("inf"),
        }
    }
}

impl<S: Scalar> Serialize for Extended<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        serializer.collect_str(self)
    }
}

type BoundFn<S> = dyn Fn(u32) -> Extended<S> + Send + Sync;

/// A raw bound sequence, exposed through its running minimum so that the
/// bound is non-increasing in effort whatever the producer does.
struct Sequence<S> {
    raw: Arc<BoundFn<S>>,
    prefix_min: Mutex<Vec<Extended<S>>>,
}

impl<S: Scalar> Sequence<S> {
    fn bound(&self, effort: u32) -> Extended<S> {
        let wanted = effort as usize + 1;
        {
            let cache = self.prefix_min.lock().expect("bound cache poisoned");
            if cache.len() >= wanted {
                return cache[effort as usize].clone();
            }
        }
        // evaluate outside the lock; raw may be expensive
        let mut cache = self.prefix_min.lock().expect("bound cache poisoned").clone();
        while cache.len() < wanted {
            let next = (self.raw)(cache.len() as u32);
            let next = match cache.last() {
                Some(prev) if *prev < next => prev.clone(),
                _ => next,
            };
            cache.push(next);
        }
        let value = cache[effort as usize].clone();
        let mut shared = self.prefix_min.lock().expect("bound cache poisoned");
        if shared.len() < cache.len() {
            *shared = cache;
        }
        value
    }
}

enum Node<S> {
    Constant(Extended<S>),
    Sequence(Sequence<S>),
    Add(UpperReal<S>, UpperReal<S>),
    Max(UpperReal<S>, UpperReal<S>),
    Scale(UpperReal<S>, S),
}

/// A value in `[0, +inf]` given by effort-indexed upper bounds.
///
/// The represented value is the infimum of all bounds. Composite values
/// pass the same effort to every child.
#[derive(Clone)]
pub struct UpperReal<S>(Arc<Node<S>>);

impl<S: Scalar> UpperReal<S> {
    /// Constant upper real. Panics if `q` is negative.
    pub fn of_rational(q: S) -> Self {
        assert!(!q.is_negative(), "upper reals are non-negative");
        UpperReal(Arc::new(Node::Constant(Extended::Finite(q))))
    }

    pub fn zero() -> Self {
        Self::of_rational(S::zero())
    }

    pub fn infinity() -> Self {
        UpperReal(Arc::new(Node::Constant(Extended::Infinity)))
    }

    /// Builds an upper real from any bound sequence. Negative bounds are
    /// clamped to zero; the sequence is made non-increasing by running min.
    pub fn from_bounds<F>(raw: F) -> Self
    where
        F: Fn(u32) -> Extended<S> + Send + Sync + 'static,
    {
        let clamped = move |e: u32| match raw(e) {
            Extended::Finite(s) if s.is_negative() => Extended::Finite(S::zero()),
            other => other,
        };
        UpperReal(Arc::new(Node::Sequence(Sequence {
            raw: Arc::new(clamped),
            prefix_min: Mutex::new(Vec::new()),
        })))
    }

    /// The bound at `effort`. Non-increasing in `effort`.
    pub fn bound(&self, effort: u32) -> Extended<S> {
        match &*self.0 {
            Node::Constant(c) => c.clone(),
            Node::Sequence(seq) => seq.bound(effort),
            Node::Add(a, b) => a.bound(effort) + b.bound(effort),
            Node::Max(a, b) => a.bound(effort).max(b.bound(effort)),
            Node::Scale(a, c) => a.bound(effort).scale(c),
        }
    }

    /// Semi-decides `value < q`. `Yes` at effort `e` persists at every
    /// larger effort and for every larger `q`.
    pub fn less_than(&self, q: &S, effort: u32) -> Result<Answer, NumericError> {
        if !q.is_positive() {
            return Err(NumericError::NonPositiveQuery(q.to_string()));
        }
        Ok(self.below(q, effort))
    }

    /// Unchecked form of [`less_than`](Self::less_than); non-positive `q`
    /// simply answers `NotYet`.
    pub fn below(&self, q: &S, effort: u32) -> Answer {
        Answer::from_bool(self.bound(effort).lt(q))
    }

    /// Smallest effort in `0..=max_effort` at which `value < q` is confirmed.
    pub fn first_below(&self, q: &S, max_effort: u32) -> Option<u32> {
        if !self.below(q, max_effort).is_yes() {
            return None;
        }
        // bounds are monotone, so bisect
        let (mut lo, mut hi) = (0u32, max_effort);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.below(q, mid).is_yes() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    pub fn add(&self, other: &Self) -> Self {
        UpperReal(Arc::new(Node::Add(self.clone(), other.clone())))
    }

    pub fn max(&self, other: &Self) -> Self {
        UpperReal(Arc::new(Node::Max(self.clone(), other.clone())))
    }

    pub fn scale(&self, c: &S) -> Result<Self, NumericError> {
        if !c.is_positive() {
            return Err(NumericError::NonPositiveScale(c.to_string()));
        }
        Ok(UpperReal(Arc::new(Node::Scale(self.clone(), c.clone()))))
    }

    /// Maximum over a list; the empty maximum is `0`.
    pub fn max_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(|a, b| a.max(&b))
            .unwrap_or_else(Self::zero)
    }

    pub fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(|a, b| a.add(&b))
            .unwrap_or_else(Self::zero)
    }
}

impl<S: Scalar> fmt::Debug for UpperReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UpperReal(<= {} at effort 0)", self.bound(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn constant_queries() {
        let x = UpperReal::of_rational(r(1, 2));
        assert_eq!(x.less_than(&r(3, 4), 0).unwrap(), Answer::Yes);
        for e in [0, 1, 10, 1000] {
            assert_eq!(x.less_than(&r(1, 2), e).unwrap(), Answer::NotYet);
        }
    }

    #[test]
    fn infinity_never_answers() {
        let x = UpperReal::<Rational>::infinity();
        assert_eq!(x.less_than(&r(1_000_000, 1), 1_000_000).unwrap(), Answer::NotYet);
    }

    #[test]
    fn non_positive_query_is_rejected() {
        let x = UpperReal::of_rational(r(1, 2));
        assert!(x.less_than(&r(0, 1), 3).is_err());
        assert!(x.less_than(&r(-1, 2), 3).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let sum = UpperReal::of_rational(r(1, 3)).add(&UpperReal::of_rational(r(1, 6)));
        assert_eq!(sum.less_than(&r(51, 100), 0).unwrap(), Answer::Yes);
        let max = UpperReal::of_rational(r(2, 1)).max(&UpperReal::of_rational(r(3, 1)));
        assert_eq!(max.less_than(&r(5, 2), 50).unwrap(), Answer::NotYet);
        let scaled = UpperReal::of_rational(r(1, 2)).scale(&r(4, 1)).unwrap();
        assert_eq!(scaled.less_than(&r(201, 100), 0).unwrap(), Answer::Yes);
        assert!(UpperReal::of_rational(r(1, 2)).scale(&r(0, 1)).is_err());
    }

    #[test]
    fn infinity_absorbs() {
        let x = UpperReal::of_rational(r(1, 1)).add(&UpperReal::infinity());
        assert_eq!(x.bound(7), Extended::Infinity);
        let y = UpperReal::infinity().scale(&r(1, 2)).unwrap();
        assert_eq!(y.bound(0), Extended::Infinity);
    }

    #[test]
    fn sequence_bounds_are_made_monotone() {
        // oscillating producer: 1, 3, 1/2, 2, 1/4, ...
        let x = UpperReal::from_bounds(|e| {
            if e % 2 == 0 {
                Extended::Finite(Rational::from_frac(1, 1 << (e / 2)))
            } else {
                Extended::Finite(Rational::from_int(3))
            }
        });
        let mut prev = x.bound(0);
        for e in 1..20 {
            let b = x.bound(e);
            assert!(b <= prev);
            prev = b;
        }
        assert_eq!(x.first_below(&r(1, 3), 40), Some(4));
    }
}
