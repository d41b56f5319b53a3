//! Points of the localic completion as regular Cauchy sequences, the
//! completion distance, and filter seeds with their regularization.
//!
//! A point is a stage function `n -> x_n` with `d(x_n, x_m) <= 2^-n + 2^-m`.
//! It belongs to the basis open `u` as soon as some stage ball
//! `b(x_n, 2^-n)` sits strictly inside `u`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Signed;
use thiserror::Error;

use crate::ball::{BallError, BallOpen, FormalBall};
use crate::metric::{MetricCarrier, Product};
use crate::numeric::{pow2_neg, Answer, Extended, Scalar, UpperReal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompletionError {
    #[error("points or opens live on different carriers")]
    CarrierMismatch,
    #[error("Cauchy certificate violated at eps = {eps}: stages {k} and {l} not confirmed closer than eps")]
    Certificate { eps: String, k: u32, l: u32 },
    #[error("regularity violated: d(x_{n}, x_{m}) exceeds 2^-{n} + 2^-{m}")]
    Regularity { n: u32, m: u32 },
    #[error("no meet witness found for generators {i} and {j}")]
    NoMeet { i: usize, j: usize },
    #[error("a filter seed needs at least one positive generator")]
    EmptySeed,
    #[error(transparent)]
    Ball(#[from] BallError),
}

type StageFn<P> = dyn Fn(u32) -> P + Send + Sync;

/// A point of the completion of `C`.
pub struct CompletionPoint<C: MetricCarrier> {
    carrier: C,
    stages: Arc<StageFn<C::Point>>,
    cache: Arc<Mutex<HashMap<u32, C::Point>>>,
}

impl<C: MetricCarrier> Clone for CompletionPoint<C> {
    fn clone(&self) -> Self {
        CompletionPoint {
            carrier: self.carrier.clone(),
            stages: self.stages.clone(),
            cache: self.cache.clone(),
        }
    }
}

impl<C: MetricCarrier> fmt::Debug for CompletionPoint<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompletionPoint")
            .field("stage0", &self.stage(0))
            .finish_non_exhaustive()
    }
}

/// Two-sided information about a distance: `Apart(l)` certifies that the
/// true distance is at least `l > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Apartness<S> {
    Apart(S),
    NotYet,
}

impl<C: MetricCarrier> CompletionPoint<C> {
    /// Wraps a stage function. The caller vouches for regularity; use
    /// [`check_regularity`](Self::check_regularity) to spot-check it.
    pub fn from_stages<F>(carrier: C, stages: F) -> Self
    where
        F: Fn(u32) -> C::Point + Send + Sync + 'static,
    {
        CompletionPoint {
            carrier,
            stages: Arc::new(stages),
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    /// The image of a carrier point: the constant sequence.
    pub fn of_carrier(carrier: C, x: C::Point) -> Self {
        Self::from_stages(carrier, move |_| x.clone())
    }

    pub fn carrier(&self) -> &C {
        &self.carrier
    }

    /// Stage `n`, within `2^-n` of the point.
    pub fn stage(&self, n: u32) -> C::Point {
        if let Some(x) = self.cache.lock().expect("stage cache poisoned").get(&n) {
            return x.clone();
        }
        let x = (self.stages)(n);
        self.cache
            .lock()
            .expect("stage cache poisoned")
            .insert(n, x.clone());
        x
    }

    /// Stage ball `b(x_n, 2^-n)`, which contains the point.
    pub fn stage_ball(&self, n: u32) -> FormalBall<C::Point, C::Scalar> {
        FormalBall { center: self.stage(n), radius: pow2_neg(n) }
    }

    fn same_carrier<D: MetricCarrier<Point = C::Point>>(&self, other: &D) -> bool
    where
        D: MetricCarrier<Scalar = C::Scalar>,
    {
        self.carrier.id() == other.id()
    }

    /// Semi-decides membership in a basis open: `Yes` iff some stage
    /// `n <= effort` has `b(x_n, 2^-n)` strictly inside one ball of `u`.
    /// Points on the boundary never answer `Yes`.
    pub fn member(&self, u: &BallOpen<C>, effort: u32) -> Result<Answer, CompletionError> {
        if !self.same_carrier(u.carrier()) {
            return Err(CompletionError::CarrierMismatch);
        }
        if !u.is_positive() {
            return Ok(Answer::NotYet);
        }
        for n in 0..=effort {
            let x = self.stage(n);
            let r = pow2_neg::<C::Scalar>(n);
            let hit = u.balls().iter().any(|b| {
                match self.carrier.dist_hi(&x, &b.center, n.max(effort)) {
                    Extended::Finite(d) => d + r.clone() < b.radius,
                    Extended::Infinity => false,
                }
            });
            if hit {
                return Ok(Answer::Yes);
            }
        }
        Ok(Answer::NotYet)
    }

    /// The completion distance as an upper real with bound
    /// `d_hi(x_n, y_n) + 2^(1-n)` at stage `n`.
    pub fn distance(&self, other: &Self) -> Result<UpperReal<C::Scalar>, CompletionError> {
        if !self.same_carrier(&other.carrier) {
            return Err(CompletionError::CarrierMismatch);
        }
        let (p, q) = (self.clone(), other.clone());
        Ok(UpperReal::from_bounds(move |n| {
            let d = p.carrier.dist_hi(&p.stage(n), &q.stage(n), n);
            d + Extended::Finite(pow2_neg::<C::Scalar>(n) * C::Scalar::from_int(2))
        }))
    }

    /// Best certified lower bound on the distance over stages `0..=effort`;
    /// may be negative when nothing is known.
    pub fn distance_lower(&self, other: &Self, effort: u32) -> C::Scalar {
        let two = C::Scalar::from_int(2);
        (0..=effort)
            .map(|n| {
                self.carrier.dist_lo(&self.stage(n), &other.stage(n), n)
                    - pow2_neg::<C::Scalar>(n) * two.clone()
            })
            .max()
            .expect("at least one stage")
    }

    /// `Apart(l)` at the first stage `n <= effort` where
    /// `d_lo(x_n, y_n) - 2^(1-n) = l` is positive.
    pub fn apartness(&self, other: &Self, effort: u32) -> Result<Apartness<C::Scalar>, CompletionError> {
        if !self.same_carrier(&other.carrier) {
            return Err(CompletionError::CarrierMismatch);
        }
        let two = C::Scalar::from_int(2);
        for n in 0..=effort {
            let lower = self.carrier.dist_lo(&self.stage(n), &other.stage(n), n)
                - pow2_neg::<C::Scalar>(n) * two.clone();
            if lower.is_positive() {
                return Ok(Apartness::Apart(lower));
            }
        }
        Ok(Apartness::NotYet)
    }

    /// Spot-checks `d(x_n, x_m) <= 2^-n + 2^-m` for all `n, m < stages`.
    pub fn check_regularity(&self, stages: u32, effort: u32) -> Result<(), CompletionError> {
        for n in 0..stages {
            for m in n + 1..stages {
                let lo = self.carrier.dist_lo(&self.stage(n), &self.stage(m), effort);
                if lo > pow2_neg::<C::Scalar>(n) + pow2_neg::<C::Scalar>(m) {
                    return Err(CompletionError::Regularity { n, m });
                }
            }
        }
        Ok(())
    }

    /// Finite prefix `x_0 .. x_{depth-1}`.
    pub fn prefix(&self, depth: u32) -> Vec<C::Point> {
        (0..depth).map(|n| self.stage(n)).collect()
    }
}

/// Pairs two points into a point of the product completion.
pub fn pair_point<L, R>(p: &CompletionPoint<L>, q: &CompletionPoint<R>) -> CompletionPoint<Product<L, R>>
where
    L: MetricCarrier,
    R: MetricCarrier<Scalar = L::Scalar>,
{
    let (a, b) = (p.clone(), q.clone());
    CompletionPoint::from_stages(
        Product::new(p.carrier.clone(), q.carrier.clone()),
        move |n| (a.stage(n), b.stage(n)),
    )
}

pub fn proj_left<L, R>(p: &CompletionPoint<Product<L, R>>) -> CompletionPoint<L>
where
    L: MetricCarrier,
    R: MetricCarrier<Scalar = L::Scalar>,
{
    let a = p.clone();
    CompletionPoint::from_stages(p.carrier.left.clone(), move |n| a.stage(n).0)
}

pub fn proj_right<L, R>(p: &CompletionPoint<Product<L, R>>) -> CompletionPoint<R>
where
    L: MetricCarrier,
    R: MetricCarrier<Scalar = L::Scalar>,
{
    let a = p.clone();
    CompletionPoint::from_stages(p.carrier.right.clone(), move |n| a.stage(n).1)
}

/// How hard [`limit_point`] probes the Cauchy certificate before
/// accepting it.
#[derive(Debug, Clone, Copy)]
pub struct CertificateCheck {
    /// Probe `eps = 2^-j` for `j <= depth`.
    pub depth: u32,
    /// Effort granted to each distance query.
    pub effort: u32,
}

impl Default for CertificateCheck {
    fn default() -> Self {
        CertificateCheck { depth: 4, effort: 64 }
    }
}

/// Limit of a Cauchy sequence of points.
///
/// `modulus(eps)` must satisfy `d(seq k, seq l) < eps` for all
/// `k, l >= modulus(eps)`. The certificate is probed on a few `(eps, k, l)`
/// triples; a probe that is not confirmed is reported.
pub fn limit_point<C, F, M>(
    carrier: C,
    seq: F,
    modulus: M,
    check: CertificateCheck,
) -> Result<CompletionPoint<C>, CompletionError>
where
    C: MetricCarrier,
    F: Fn(u32) -> CompletionPoint<C> + Send + Sync + 'static,
    M: Fn(&C::Scalar) -> u32 + Send + Sync + 'static,
{
    let memo: Arc<Mutex<HashMap<u32, CompletionPoint<C>>>> = Arc::new(Mutex::new(HashMap::new()));
    let seq = Arc::new(seq);
    let term = {
        let memo = memo.clone();
        let seq = seq.clone();
        move |k: u32| -> CompletionPoint<C> {
            if let Some(p) = memo.lock().expect("limit memo poisoned").get(&k) {
                return p.clone();
            }
            let p = seq(k);
            memo.lock().expect("limit memo poisoned").insert(k, p.clone());
            p
        }
    };
    let term = Arc::new(term);

    // running max keeps the modulus monotone along the dyadic eps ladder
    let modulus = Arc::new(modulus);
    let index = {
        let modulus = modulus.clone();
        move |j: u32| -> u32 {
            (0..=j)
                .map(|i| modulus(&pow2_neg::<C::Scalar>(i)))
                .max()
                .unwrap_or(0)
        }
    };

    for j in 0..=check.depth {
        let eps = pow2_neg::<C::Scalar>(j);
        let m = index(j);
        for (k, l) in [(m, m + 1), (m, m + 3), (m + 2, m + 7)] {
            let d = term(k).distance(&term(l))?;
            if !d.below(&eps, check.effort).is_yes() {
                return Err(CompletionError::Certificate { eps: eps.to_string(), k, l });
            }
        }
    }

    let stage_term = term.clone();
    Ok(CompletionPoint::from_stages(carrier, move |n| {
        let k = index(n + 1);
        stage_term(k).stage(n + 1)
    }))
}

/// A finite family of basis opens generating a Cauchy filter, either by
/// upward closure (`F`) or, once regularized, by well-inside closure
/// (`F^r = {V : some generator ◁ V}`).
#[derive(Debug, Clone)]
pub struct FilterSeed<C: MetricCarrier> {
    generators: Vec<BallOpen<C>>,
    regular: bool,
}

impl<C: MetricCarrier> FilterSeed<C> {
    pub fn new(generators: Vec<BallOpen<C>>) -> Result<Self, CompletionError> {
        let first = generators.first().ok_or(CompletionError::EmptySeed)?;
        for g in &generators {
            if !g.is_positive() {
                return Err(CompletionError::EmptySeed);
            }
            if !g.same_carrier(first) {
                return Err(CompletionError::CarrierMismatch);
            }
        }
        Ok(FilterSeed { generators, regular: false })
    }

    /// The stage balls `b(x_n, 2^-n)` for `n < depth`.
    pub fn of_point(p: &CompletionPoint<C>, depth: u32) -> Self {
        let generators = (0..depth.max(1))
            .map(|n| {
                BallOpen::new(p.carrier().clone(), vec![p.stage_ball(n)])
                    .expect("stage balls have positive radius")
            })
            .collect();
        FilterSeed { generators, regular: false }
    }

    pub fn generators(&self) -> &[BallOpen<C>] {
        &self.generators
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// `eps_k = 2^-k * (min radius) / 4`.
    pub fn eps_schedule(&self, k: u32) -> C::Scalar {
        let min_radius = self
            .generators
            .iter()
            .flat_map(|g| g.balls().iter().map(|b| b.radius.clone()))
            .min()
            .expect("seeds have at least one ball");
        pow2_neg::<C::Scalar>(k) * min_radius / C::Scalar::from_int(4)
    }

    /// Membership of `v` in the generated filter.
    pub fn member(&self, v: &BallOpen<C>, effort: u32) -> Result<Answer, CompletionError> {
        if !self.generators[0].same_carrier(v) {
            return Err(CompletionError::CarrierMismatch);
        }
        if !self.regular {
            return Ok(self.member_upward(v, effort));
        }
        for k in 0..=effort {
            let eps = self.eps_schedule(k);
            for g in &self.generators {
                if g.way_inside(&eps, v, effort)?.is_yes() {
                    return Ok(Answer::Yes);
                }
            }
        }
        Ok(Answer::NotYet)
    }

    /// Membership in the upward closure, ignoring regularization.
    pub fn member_upward(&self, v: &BallOpen<C>, effort: u32) -> Answer {
        let hit = self
            .generators
            .iter()
            .any(|g| g.included_in(v, effort).map(Answer::is_yes).unwrap_or(false));
        Answer::from_bool(hit)
    }

    /// Filter compatibility: every pair of generators has a meet witness.
    pub fn check_meets(&self, effort: u32) -> Result<(), CompletionError> {
        for i in 0..self.generators.len() {
            for j in i + 1..self.generators.len() {
                if self.generators[i]
                    .meet_witness(&self.generators[j], effort)?
                    .is_none()
                {
                    return Err(CompletionError::NoMeet { i, j });
                }
            }
        }
        Ok(())
    }

    /// Some generator has diameter below `q`.
    pub fn has_member_smaller_than(&self, q: &C::Scalar, effort: u32) -> Answer {
        let hit = self
            .generators
            .iter()
            .any(|g| g.diameter_upper().below(q, effort).is_yes());
        Answer::from_bool(hit)
    }

    /// The regular subfilter `F^r`. Generators are kept; membership
    /// switches to the well-inside rule with the `eps_k` schedule.
    /// Regularizing twice changes nothing.
    pub fn regularize(&self, effort: u32) -> Result<Self, CompletionError> {
        self.check_meets(effort)?;
        Ok(FilterSeed { generators: self.generators.clone(), regular: true })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FiniteSpace, RationalLine};
    use crate::Rational;

    type Line = RationalLine<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn pt(x: Rational) -> CompletionPoint<Line> {
        CompletionPoint::of_carrier(Line::new(), x)
    }

    fn ball(c: Rational, rad: Rational) -> BallOpen<Line> {
        BallOpen::single(Line::new(), c, rad).unwrap()
    }

    #[test]
    fn carrier_point_membership() {
        let zero = pt(r(0, 1));
        assert_eq!(zero.member(&ball(r(0, 1), r(1, 1)), 4).unwrap(), Answer::Yes);
        assert_eq!(zero.member(&ball(r(3, 1), r(1, 1)), 200).unwrap(), Answer::NotYet);
        let two = FiniteSpace::<Rational>::discrete(2);
        let one = CompletionPoint::of_carrier(two.clone(), 1usize);
        let d = one.distance(&one.clone()).unwrap();
        for q in [r(1, 1), r(1, 100), r(1, 1 << 20)] {
            assert!(d.first_below(&q, 64).is_some());
        }
    }

    #[test]
    fn member_examples() {
        assert_eq!(pt(r(1, 2)).member(&ball(r(0, 1), r(1, 1)), 4).unwrap(), Answer::Yes);
        assert_eq!(pt(r(1, 1)).member(&ball(r(0, 1), r(1, 1)), 300).unwrap(), Answer::NotYet);
        let empty = BallOpen::empty(Line::new());
        assert_eq!(pt(r(1, 2)).member(&empty, 50).unwrap(), Answer::NotYet);
    }

    #[test]
    fn distance_examples() {
        let d = pt(r(0, 1)).distance(&pt(r(1, 1))).unwrap();
        assert_eq!(d.first_below(&r(3, 2), 64), Some(3));
        assert_eq!(d.less_than(&r(9, 10), 500).unwrap(), Answer::NotYet);
        let same = pt(r(1, 3));
        let d = same.distance(&same).unwrap();
        assert!(d.first_below(&r(1, 1000), 64).is_some());
    }

    #[test]
    fn apartness_examples() {
        let a = pt(r(0, 1)).apartness(&pt(r(1, 1)), 10).unwrap();
        assert_eq!(a, Apartness::Apart(r(1, 2)));
        assert_eq!(pt(r(1, 1)).apartness(&pt(r(1, 1)), 300).unwrap(), Apartness::NotYet);
        let tiny = pt(Rational::from_frac(1, 1 << 10));
        assert_eq!(pt(r(0, 1)).apartness(&tiny, 11).unwrap(), Apartness::NotYet);
        assert!(matches!(pt(r(0, 1)).apartness(&tiny, 12).unwrap(), Apartness::Apart(_)));
    }

    #[test]
    fn pairing_and_projection() {
        let p = pair_point(&pt(r(0, 1)), &pt(r(1, 1)));
        let q = pair_point(&pt(r(1, 1)), &pt(r(1, 1)));
        assert!(p.distance(&q).unwrap().first_below(&r(11, 10), 64).is_some());
        assert!(p.distance(&p).unwrap().first_below(&r(1, 1 << 12), 64).is_some());
        let back = proj_left(&p);
        for n in 0..10 {
            assert_eq!(back.stage(n), r(0, 1));
            assert_eq!(proj_right(&p).stage(n), r(1, 1));
        }
    }

    #[test]
    fn geometric_limit() {
        // seq k = 1 - 2^-k, modulus(eps) = ceil(log2(2 / eps))
        let lim = limit_point(
            Line::new(),
            |k| pt(r(1, 1) - pow2_neg::<Rational>(k)),
            |eps: &Rational| ceil_log2(&(r(2, 1) / eps.clone())),
            CertificateCheck::default(),
        )
        .unwrap();
        let d = lim.distance(&pt(r(1, 1))).unwrap();
        for j in [1, 5, 10, 20] {
            assert!(d.first_below(&pow2_neg(j), 64).is_some(), "eps 2^-{j}");
        }
        lim.check_regularity(12, 0).unwrap();
    }

    #[test]
    fn partial_sums_limit() {
        let lim = limit_point(
            Line::new(),
            |k| pt((0..=k).map(pow2_neg::<Rational>).fold(r(0, 1), |a, b| a + b)),
            |eps: &Rational| ceil_log2(&(r(2, 1) / eps.clone())),
            CertificateCheck::default(),
        )
        .unwrap();
        let d = lim.distance(&pt(r(2, 1))).unwrap();
        assert!(d.first_below(&pow2_neg(16), 64).is_some());
    }

    #[test]
    fn constant_limit() {
        let lim = limit_point(Line::new(), |_| pt(r(5, 7)), |_: &Rational| 0, CertificateCheck::default())
            .unwrap();
        assert_eq!(lim.stage(9), r(5, 7));
    }

    #[test]
    fn broken_certificate_is_reported() {
        // seq k = k, which is not Cauchy
        let res = limit_point(
            Line::new(),
            |k| pt(Rational::from_int(k as i64)),
            |_: &Rational| 0,
            CertificateCheck::default(),
        );
        assert!(matches!(res, Err(CompletionError::Certificate { k: 0, l: 1, .. })));
    }

    #[test]
    fn regularity_violation_detected() {
        let bad = CompletionPoint::from_stages(Line::new(), |n| Rational::from_int(n as i64));
        assert!(matches!(bad.check_regularity(4, 0), Err(CompletionError::Regularity { .. })));
    }

    #[test]
    fn seed_regularization() {
        let seed = FilterSeed::new(vec![ball(r(0, 1), r(1, 1))]).unwrap();
        let reg = seed.regularize(4).unwrap();
        // b(0,1) is in F but not in F^r; b(0, 1 + 1/8) is in both
        assert_eq!(seed.member(&ball(r(0, 1), r(1, 1)), 8).unwrap(), Answer::Yes);
        assert_eq!(reg.member(&ball(r(0, 1), r(1, 1)), 64).unwrap(), Answer::NotYet);
        assert_eq!(reg.member(&ball(r(0, 1), r(9, 8)), 8).unwrap(), Answer::Yes);
        let again = reg.regularize(4).unwrap();
        for rad in [r(1, 1), r(17, 16), r(3, 2), r(1, 2)] {
            let v = ball(r(0, 1), rad);
            assert_eq!(again.member(&v, 64).unwrap(), reg.member(&v, 64).unwrap());
        }
    }

    #[test]
    fn seed_without_meets_is_rejected() {
        let seed = FilterSeed::new(vec![ball(r(0, 1), r(1, 1)), ball(r(10, 1), r(1, 1))]).unwrap();
        assert_eq!(seed.regularize(8).unwrap_err(), CompletionError::NoMeet { i: 0, j: 1 });
    }

    #[test]
    fn point_seed_matches_point_membership() {
        let p = pt(r(1, 3));
        let seed = FilterSeed::of_point(&p, 40).regularize(4).unwrap();
        for (c, rad) in [(r(0, 1), r(1, 2)), (r(1, 1), r(1, 2)), (r(1, 3), r(1, 1000)), (r(2, 1), r(3, 2))] {
            let v = ball(c, rad);
            assert_eq!(seed.member(&v, 40).unwrap(), p.member(&v, 40).unwrap());
        }
    }

    pub(crate) fn ceil_log2(x: &Rational) -> u32 {
        let mut k = 0;
        while crate::numeric::pow2::<Rational>(k) < *x {
            k += 1;
        }
        k
    }
}
