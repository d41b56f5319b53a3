//! Formal balls and their finite unions, the basis opens of a completion,
//! with the diameter, neighbourhood and well-inside operators.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::metric::MetricCarrier;
use crate::numeric::{half, Answer, Extended, Scalar, UpperReal};

/// `(center, radius)`, denoting the open ball of that radius. Radii are
/// strictly positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalBall<P, S> {
    pub center: P,
    pub radius: S,
}

/// Formal ball over the points and scalars of carrier `C`.
pub type Ball<C> = FormalBall<<C as MetricCarrier>::Point, <C as MetricCarrier>::Scalar>;

impl<P, S: Scalar> FormalBall<P, S> {
    pub fn new(center: P, radius: S) -> Result<Self, BallError> {
        if !radius.is_positive() {
            return Err(BallError::NonPositiveRadius(radius.to_string()));
        }
        Ok(FormalBall { center, radius })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallError {
    #[error("ball radius must be positive, got {0}")]
    NonPositiveRadius(String),
    #[error("well-inside margin must be positive, got {0}")]
    NonPositiveMargin(String),
    #[error("opens live on different carriers")]
    CarrierMismatch,
    #[error("ball center is not a point of the carrier")]
    ForeignPoint,
}

/// A finite union of formal balls on one carrier. The empty list is the
/// empty open.
#[derive(Debug, Clone)]
pub struct BallOpen<C: MetricCarrier> {
    carrier: C,
    balls: Vec<Ball<C>>,
}

impl<C: MetricCarrier> PartialEq for BallOpen<C> {
    fn eq(&self, other: &Self) -> bool {
        self.carrier.id() == other.carrier.id() && self.balls == other.balls
    }
}

impl<C: MetricCarrier> BallOpen<C> {
    pub fn new(carrier: C, balls: Vec<Ball<C>>) -> Result<Self, BallError> {
        for b in &balls {
            if !b.radius.is_positive() {
                return Err(BallError::NonPositiveRadius(b.radius.to_string()));
            }
            if !carrier.contains(&b.center) {
                return Err(BallError::ForeignPoint);
            }
        }
        Ok(BallOpen { carrier, balls })
    }

    pub fn empty(carrier: C) -> Self {
        BallOpen { carrier, balls: Vec::new() }
    }

    pub fn single(carrier: C, center: C::Point, radius: C::Scalar) -> Result<Self, BallError> {
        Self::new(carrier, vec![FormalBall::new(center, radius)?])
    }

    pub fn carrier(&self) -> &C {
        &self.carrier
    }

    pub fn balls(&self) -> &[Ball<C>] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn same_carrier(&self, other: &Self) -> bool {
        self.carrier.id() == other.carrier.id()
    }

    fn check_carrier(&self, other: &Self) -> Result<(), BallError> {
        if self.same_carrier(other) {
            Ok(())
        } else {
            Err(BallError::CarrierMismatch)
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, BallError> {
        self.check_carrier(other)?;
        let mut balls = self.balls.clone();
        balls.extend(other.balls.iter().cloned());
        Ok(BallOpen { carrier: self.carrier.clone(), balls })
    }

    /// Every formal ball contains its center, so an open is positive
    /// exactly when it lists at least one ball.
    pub fn is_positive(&self) -> bool {
        !self.balls.is_empty()
    }

    /// Sound upper bound on the diameter: the maximum of `2r` over balls
    /// and of `d(c, c') + r + r'` over pairs. The empty open has diameter 0.
    pub fn diameter_upper(&self) -> UpperReal<C::Scalar> {
        if self.balls.is_empty() {
            return UpperReal::zero();
        }
        let carrier = self.carrier.clone();
        let balls = self.balls.clone();
        let exact = balls.len() == 1 || self.exact_at_zero();
        if exact {
            let bound = diameter_bound(&carrier, &balls, 0);
            return match bound {
                Extended::Finite(b) => UpperReal::of_rational(b),
                Extended::Infinity => UpperReal::infinity(),
            };
        }
        UpperReal::from_bounds(move |e| diameter_bound(&carrier, &balls, e))
    }

    fn exact_at_zero(&self) -> bool {
        self.balls.iter().all(|a| {
            self.balls
                .iter()
                .all(|b| self.carrier.dist(&a.center, &b.center, 0).is_exact())
        })
    }

    /// Single-ball domination test for `self ◁_eps v`: every ball `b(x, q)`
    /// of `self` needs one ball `b(y, r)` of `v` with `d(x, y) + q + eps <= r`.
    ///
    /// `Yes` is sound; an open covered only jointly by several balls of `v`
    /// answers `NotYet`.
    pub fn way_inside(
        &self,
        eps: &C::Scalar,
        v: &Self,
        effort: u32,
    ) -> Result<Answer, BallError> {
        if !eps.is_positive() {
            return Err(BallError::NonPositiveMargin(eps.to_string()));
        }
        self.check_carrier(v)?;
        Ok(self.dominated_by(v, effort, |slack| slack >= *eps))
    }

    /// `self ◁ v` for some positive margin: every ball dominated with
    /// strict slack.
    pub fn strictly_inside(&self, v: &Self, effort: u32) -> Result<Answer, BallError> {
        self.check_carrier(v)?;
        Ok(self.dominated_by(v, effort, |slack| slack.is_positive()))
    }

    /// Ball-level inclusion `self <= v`: every ball dominated with
    /// non-negative slack.
    pub fn included_in(&self, v: &Self, effort: u32) -> Result<Answer, BallError> {
        self.check_carrier(v)?;
        Ok(self.dominated_by(v, effort, |slack| !slack.is_negative()))
    }

    fn dominated_by<F>(&self, v: &Self, effort: u32, accept: F) -> Answer
    where
        F: Fn(C::Scalar) -> bool,
    {
        let ok = self.balls.iter().all(|inner| {
            v.balls.iter().any(|outer| {
                match self.carrier.dist_hi(&inner.center, &outer.center, effort) {
                    Extended::Finite(d) => {
                        accept(outer.radius.clone() - d - inner.radius.clone())
                    }
                    Extended::Infinity => false,
                }
            })
        });
        Answer::from_bool(ok)
    }

    /// Enlarges every radius by `q`. The result contains the
    /// `q`-neighbourhood of `self`; on the line it is exactly it.
    pub fn neighborhood(&self, q: &C::Scalar) -> Result<Self, BallError> {
        if !q.is_positive() {
            return Err(BallError::NonPositiveMargin(q.to_string()));
        }
        let balls = self
            .balls
            .iter()
            .map(|b| FormalBall { center: b.center.clone(), radius: b.radius.clone() + q.clone() })
            .collect();
        Ok(BallOpen { carrier: self.carrier.clone(), balls })
    }

    /// Looks for a single ball well inside both `self` and `v`.
    ///
    /// Candidates are the carrier's `between` points for every pair of
    /// balls; the widest witness wins. `None` is not a refutation.
    pub fn meet_witness(&self, v: &Self, effort: u32) -> Result<Option<Ball<C>>, BallError> {
        self.check_carrier(v)?;
        let mut best: Option<Ball<C>> = None;
        for bu in &self.balls {
            for bv in &v.balls {
                for c in self.carrier.between(&bu.center, &bv.center, effort) {
                    let slack_u = slack(&self.carrier, &c, bu, effort);
                    let slack_v = slack(&self.carrier, &c, bv, effort);
                    let (Some(su), Some(sv)) = (slack_u, slack_v) else { continue };
                    let s = half(&su.min(sv));
                    if !s.is_positive() {
                        continue;
                    }
                    if best.as_ref().map_or(true, |b| s > b.radius) {
                        best = Some(FormalBall { center: c, radius: s });
                    }
                }
            }
        }
        Ok(best)
    }

    /// `{"carrier": id, "balls": [{"c": center, "r": "p/q"}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let balls: Vec<_> = self
            .balls
            .iter()
            .map(|b| serde_json::json!({ "c": self.carrier.render(&b.center), "r": b.radius.to_string() }))
            .collect();
        serde_json::json!({ "carrier": self.carrier.id().to_json(), "balls": balls })
    }

    /// Semi-decides whether a carrier point lies in the open.
    pub fn contains_point(&self, x: &C::Point, effort: u32) -> Answer {
        let hit = self.balls.iter().any(|b| {
            self.carrier.dist_hi(x, &b.center, effort).lt(&b.radius)
        });
        Answer::from_bool(hit)
    }
}

fn slack<C: MetricCarrier>(
    carrier: &C,
    c: &C::Point,
    ball: &Ball<C>,
    effort: u32,
) -> Option<C::Scalar> {
    carrier
        .dist_hi(c, &ball.center, effort)
        .finite()
        .map(|d| ball.radius.clone() - d.clone())
}

fn diameter_bound<C: MetricCarrier>(
    carrier: &C,
    balls: &[Ball<C>],
    effort: u32,
) -> Extended<C::Scalar> {
    let two = C::Scalar::from_int(2);
    let mut best = Extended::Finite(C::Scalar::zero());
    for (i, a) in balls.iter().enumerate() {
        best = best.max(Extended::Finite(a.radius.clone() * two.clone()));
        for b in &balls[i + 1..] {
            let d = carrier.dist_hi(&a.center, &b.center, effort);
            let pair = d + Extended::Finite(a.radius.clone() + b.radius.clone());
            best = best.max(pair);
        }
    }
    best
}
