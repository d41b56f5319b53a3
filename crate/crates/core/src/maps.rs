//! Maps between completions, given by a carrier map into the target
//! completion together with a modulus certificate.
//!
//! The certificate says: if `d(a, b) < modulus(eps)` then the images are
//! closer than `eps`. Metric maps have the identity modulus. Certificates
//! are spot-checked on samples, never proven, so downstream `Yes` answers
//! are conditional on them.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::ball::{Ball, BallOpen};
use crate::completion::{pair_point, CompletionError, CompletionPoint};
use crate::metric::{MetricCarrier, Product};
use crate::numeric::{half, pow2_neg, Scalar};
use crate::report::Verdict;

/// How strongly a map controls distances. Ordered weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MapClass {
    Uniform,
    Metric,
    Isometric,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("carrier of the argument does not match the map's source")]
    CarrierMismatch,
    #[error("point is not certified to lie inside the map's region")]
    OutsideRegion,
    #[error("modulus certificate violated: {0}")]
    Certificate(String),
    #[error(transparent)]
    Completion(#[from] CompletionError),
}

type ModulusFn<S> = dyn Fn(&S) -> S + Send + Sync;

/// Per dyadic level `k`: `eta(2^-k)` and the least `m` with `2^-m` below it.
struct Level<S> {
    eta: S,
    stage: u32,
}

/// A modulus of uniform continuity, made monotone by construction: it is
/// only ever evaluated on the ladder `eps = 2^-k` and takes a running
/// minimum along it.
#[derive(Clone)]
pub struct Modulus<S> {
    raw: Arc<ModulusFn<S>>,
    levels: Arc<Mutex<Vec<Level<S>>>>,
}

/// Smallest `k` with `2^-k <= eps`, for positive `eps`.
pub fn dyadic_level<S: Scalar>(eps: &S) -> u32 {
    let mut k = 0;
    let mut p = S::one();
    while p > *eps {
        p = half(&p);
        k += 1;
    }
    k
}

impl<S: Scalar> Modulus<S> {
    pub fn new<F>(raw: F) -> Self
    where
        F: Fn(&S) -> S + Send + Sync + 'static,
    {
        Modulus { raw: Arc::new(raw), levels: Arc::new(Mutex::new(Vec::new())) }
    }

    /// `eta(eps) = eps`, the modulus of a metric map.
    pub fn identity() -> Self {
        Self::new(|eps: &S| eps.clone())
    }

    /// `eta(eps) = eps * c` for a positive rational `c`.
    pub fn linear(c: S) -> Self {
        assert!(c.is_positive(), "modulus slope must be positive");
        Self::new(move |eps: &S| eps.clone() * c.clone())
    }

    fn level<T>(&self, k: u32, read: impl Fn(&Level<S>) -> T) -> T {
        let mut levels = self.levels.lock().expect("modulus cache poisoned");
        while levels.len() <= k as usize {
            let j = levels.len() as u32;
            let raw = (self.raw)(&pow2_neg::<S>(j));
            let eta = match levels.last() {
                Some(prev) if !raw.is_positive() || prev.eta < raw => prev.eta.clone(),
                None if !raw.is_positive() => pow2_neg::<S>(64),
                _ => raw,
            };
            let mut stage = levels.last().map_or(0, |prev| prev.stage);
            let mut p = pow2_neg::<S>(stage);
            while p >= eta {
                p = half(&p);
                stage += 1;
            }
            levels.push(Level { eta, stage });
        }
        read(&levels[k as usize])
    }

    /// `eta(2^-k)`.
    pub fn eta_level(&self, k: u32) -> S {
        self.level(k, |l| l.eta.clone())
    }

    /// Least `m` with `2^-m < eta(2^-k)`.
    pub fn stage_level(&self, k: u32) -> u32 {
        self.level(k, |l| l.stage)
    }

    /// Positive, monotone non-decreasing in `eps`, and never larger than
    /// the raw modulus at the nearest dyadic below `eps`.
    pub fn eta(&self, eps: &S) -> S {
        self.eta_level(dyadic_level(eps))
    }

    /// `eps -> inner(outer(eps))`: the modulus of `g . f` where `outer`
    /// belongs to `g` and `inner` to `f`.
    pub fn then(&self, inner: &Modulus<S>) -> Modulus<S> {
        let (outer, inner) = (self.clone(), inner.clone());
        Modulus::new(move |eps: &S| inner.eta(&outer.eta(eps)))
    }
}

type CarrierMapFn<X, Y> =
    dyn Fn(&<X as MetricCarrier>::Point) -> CompletionPoint<Y> + Send + Sync;

/// Effort spent certifying that a point lies inside a map's region.
pub const REGION_EFFORT: u32 = 64;

/// Output stages spot-checked for regularity by [`MapRep::apply`].
pub const SPOT_CHECK_STAGES: u32 = 6;

/// A map from the completion of `X` to the completion of `Y`.
pub struct MapRep<X: MetricCarrier, Y: MetricCarrier<Scalar = X::Scalar>> {
    source: X,
    target: Y,
    carrier_map: Arc<CarrierMapFn<X, Y>>,
    modulus: Modulus<X::Scalar>,
    class: MapClass,
    region: Option<Ball<X>>,
    label: String,
}

impl<X, Y> Clone for MapRep<X, Y>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    fn clone(&self) -> Self {
        MapRep {
            source: self.source.clone(),
            target: self.target.clone(),
            carrier_map: self.carrier_map.clone(),
            modulus: self.modulus.clone(),
            class: self.class,
            region: self.region.clone(),
            label: self.label.clone(),
        }
    }
}

impl<X, Y> fmt::Debug for MapRep<X, Y>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapRep")
            .field("label", &self.label)
            .field("class", &self.class)
            .field("region", &self.region)
            .finish_non_exhaustive()
    }
}

impl<X, Y> MapRep<X, Y>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    pub fn new<F>(source: X, target: Y, carrier_map: F, modulus: Modulus<X::Scalar>, class: MapClass) -> Self
    where
        F: Fn(&X::Point) -> CompletionPoint<Y> + Send + Sync + 'static,
    {
        let modulus = if class >= MapClass::Metric { Modulus::identity() } else { modulus };
        MapRep {
            source,
            target,
            carrier_map: Arc::new(carrier_map),
            modulus,
            class,
            region: None,
            label: String::from("map"),
        }
    }

    /// A map sending carrier points to carrier points.
    pub fn from_point_map<F>(source: X, target: Y, f: F, modulus: Modulus<X::Scalar>, class: MapClass) -> Self
    where
        F: Fn(&X::Point) -> Y::Point + Send + Sync + 'static,
    {
        let tgt = target.clone();
        Self::new(
            source,
            target,
            move |x| CompletionPoint::of_carrier(tgt.clone(), f(x)),
            modulus,
            class,
        )
    }

    /// Restricts application to points certified inside `region`. The
    /// carrier map must still be total.
    pub fn with_region(mut self, region: Ball<X>) -> Self {
        self.region = Some(region);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn source(&self) -> &X {
        &self.source
    }

    pub fn target(&self) -> &Y {
        &self.target
    }

    pub fn class(&self) -> MapClass {
        self.class
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn region(&self) -> Option<&Ball<X>> {
        self.region.as_ref()
    }

    pub fn modulus(&self) -> &Modulus<X::Scalar> {
        &self.modulus
    }

    /// Image of a carrier point, as a point of the target completion.
    pub fn on_carrier(&self, x: &X::Point) -> CompletionPoint<Y> {
        (self.carrier_map)(x)
    }

    /// Applies the map to a completion point.
    ///
    /// Stage `n` of the image is stage `n + 1` of the image of `x_m`,
    /// where `2^-m < modulus(2^-(n+1))`. Fails when the point is not
    /// certified inside the region or the image fails a regularity
    /// spot-check.
    pub fn apply(&self, p: &CompletionPoint<X>) -> Result<CompletionPoint<Y>, MapError> {
        if p.carrier().id() != self.source.id() {
            return Err(MapError::CarrierMismatch);
        }
        if let Some(region) = &self.region {
            let open = BallOpen::new(self.source.clone(), vec![region.clone()])
                .expect("region ball is valid");
            if !p.member(&open, REGION_EFFORT)?.is_yes() {
                return Err(MapError::OutsideRegion);
            }
        }
        let image = self.apply_unchecked(p);
        image
            .check_regularity(SPOT_CHECK_STAGES, SPOT_CHECK_STAGES)
            .map_err(|e| MapError::Certificate(format!("{} on image of stage point: {e}", self.label)))?;
        Ok(image)
    }

    /// [`apply`](Self::apply) without region or regularity checks.
    pub fn apply_unchecked(&self, p: &CompletionPoint<X>) -> CompletionPoint<Y> {
        let f = self.carrier_map.clone();
        let modulus = self.modulus.clone();
        let p = p.clone();
        CompletionPoint::from_stages(self.target.clone(), move |n| {
            let m = modulus.stage_level(n + 1);
            f(&p.stage(m)).stage(n + 1)
        })
    }
}

/// `g . f`. The class is the weaker of the two; the modulus composes.
pub fn compose_maps<X, Y, Z>(g: &MapRep<Y, Z>, f: &MapRep<X, Y>) -> Result<MapRep<X, Z>, MapError>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
    Z: MetricCarrier<Scalar = X::Scalar>,
{
    if f.target.id() != g.source.id() {
        return Err(MapError::CarrierMismatch);
    }
    let (gg, ff) = (g.clone(), f.clone());
    let class = g.class.min(f.class);
    let modulus = g.modulus.then(&f.modulus);
    let mut composed = MapRep::new(
        f.source.clone(),
        g.target.clone(),
        move |x| gg.apply_unchecked(&ff.on_carrier(x)),
        modulus,
        class,
    )
    .with_label(format!("{} . {}", g.label, f.label));
    composed.region = f.region.clone();
    Ok(composed)
}

/// `x -> (f x, g x)` into the max-metric product. The class is the weaker
/// of the two and the modulus is the pointwise minimum.
pub fn pair_maps<X, L, R>(f: &MapRep<X, L>, g: &MapRep<X, R>) -> Result<MapRep<X, Product<L, R>>, MapError>
where
    X: MetricCarrier,
    L: MetricCarrier<Scalar = X::Scalar>,
    R: MetricCarrier<Scalar = X::Scalar>,
{
    if f.source.id() != g.source.id() {
        return Err(MapError::CarrierMismatch);
    }
    let region = match (&f.region, &g.region) {
        (Some(a), Some(b)) if a != b => {
            return Err(MapError::Certificate("paired maps have different regions".into()))
        }
        (a, b) => a.clone().or_else(|| b.clone()),
    };
    let (mf, mg) = (f.modulus.clone(), g.modulus.clone());
    let modulus = Modulus::new(move |eps: &X::Scalar| mf.eta(eps).min(mg.eta(eps)));
    let (ff, gg) = (f.clone(), g.clone());
    let mut paired = MapRep::new(
        f.source.clone(),
        Product::new(f.target.clone(), g.target.clone()),
        move |x| pair_point(&ff.on_carrier(x), &gg.on_carrier(x)),
        modulus,
        f.class.min(g.class),
    )
    .with_label(format!("pair({}, {})", f.label, g.label));
    paired.region = region;
    Ok(paired)
}

/// First projection of a product, a metric map.
pub fn proj_left_map<L, R>(carrier: &Product<L, R>) -> MapRep<Product<L, R>, L>
where
    L: MetricCarrier,
    R: MetricCarrier<Scalar = L::Scalar>,
{
    MapRep::from_point_map(carrier.clone(), carrier.left.clone(), |p| p.0.clone(), Modulus::identity(), MapClass::Metric)
        .with_label("proj1")
}

/// Second projection of a product, a metric map.
pub fn proj_right_map<L, R>(carrier: &Product<L, R>) -> MapRep<Product<L, R>, R>
where
    L: MetricCarrier,
    R: MetricCarrier<Scalar = L::Scalar>,
{
    MapRep::from_point_map(carrier.clone(), carrier.right.clone(), |p| p.1.clone(), Modulus::identity(), MapClass::Metric)
        .with_label("proj2")
}

/// Checks `d(a, b) < eta(eps) => d(f a, f b) < eps` on sample pairs for
/// `eps = 2^-j`, `j <= 8`, using exact carrier distances.
fn check_point_modulus<X, Y, F>(
    source: &X,
    target: &Y,
    f: &F,
    modulus: &Modulus<X::Scalar>,
    samples: &[(X::Point, X::Point)],
) -> Result<(), MapError>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
    F: Fn(&X::Point) -> Y::Point,
{
    for (a, b) in samples {
        let d = source.dist(a, b, 0);
        let (fa, fb) = (f(a), f(b));
        for j in 0..=8 {
            let eps = pow2_neg::<X::Scalar>(j);
            if d.hi.lt(&modulus.eta(&eps)) && !target.dist_hi(&fa, &fb, 0).lt(&eps) {
                return Err(MapError::Certificate(format!(
                    "pair ({}, {}) at eps {eps}",
                    source.render(a),
                    source.render(b)
                )));
            }
        }
    }
    Ok(())
}

/// Extends a uniformly continuous carrier map to the completion.
///
/// The contract is checked on the supplied sample pairs; the first
/// violating pair is reported.
pub fn extend_by_density<X, Y, F>(
    source: X,
    target: Y,
    dense_map: F,
    modulus: Modulus<X::Scalar>,
    class: MapClass,
    samples: &[(X::Point, X::Point)],
) -> Result<MapRep<X, Y>, MapError>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
    F: Fn(&X::Point) -> Y::Point + Send + Sync + 'static,
{
    let effective = if class >= MapClass::Metric { Modulus::identity() } else { modulus.clone() };
    check_point_modulus(&source, &target, &dense_map, &effective, samples)?;
    Ok(MapRep::from_point_map(source, target, dense_map, modulus, class).with_label("extension"))
}

/// One sampled pair in a [`ClassReport`].
#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub a: serde_json::Value,
    pub b: serde_json::Value,
    pub source_distance: String,
    pub metric: Option<Verdict>,
    pub uniform: Verdict,
    pub isometric: Option<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub label: String,
    pub claimed: MapClass,
    pub effort: u32,
    pub verdict: Verdict,
    pub pairs: Vec<PairCheck>,
    pub note: &'static str,
}

/// Tolerance `2^-16` granted to query-level distance comparisons.
pub const CLASSIFY_TOLERANCE_BITS: u32 = 16;

/// Checks the claimed class of `f` on sample pairs of carrier points.
///
/// For metric claims: `d(f a, f b) <= d(a, b)`, failing only when a
/// certified lower bound exceeds `d(a, b)`. For every claim: the modulus
/// contract on `eps = 2^-j`, `j <= 6`. For isometric claims additionally
/// `d(f a, f b) >= d(a, b)`.
pub fn classify_map<X, Y>(f: &MapRep<X, Y>, samples: &[(X::Point, X::Point)], effort: u32) -> ClassReport
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    let tol = pow2_neg::<X::Scalar>(CLASSIFY_TOLERANCE_BITS);
    let mut pairs = Vec::with_capacity(samples.len());
    let mut verdict = Verdict::Pass;
    for (a, b) in samples {
        let d = f.source.dist(a, b, effort);
        let fa = f.apply_unchecked(&CompletionPoint::of_carrier(f.source.clone(), a.clone()));
        let fb = f.apply_unchecked(&CompletionPoint::of_carrier(f.source.clone(), b.clone()));
        let image = fa.distance(&fb).expect("images share the target carrier");
        let lower = fa.distance_lower(&fb, effort);

        let metric = (f.class >= MapClass::Metric).then(|| match d.hi.finite() {
            Some(hi) if lower > *hi => Verdict::Fail,
            Some(hi) if image.below(&(hi.clone() + tol.clone()), effort).is_yes() => Verdict::Pass,
            _ => Verdict::Inconclusive,
        });

        let mut uniform = Verdict::Pass;
        for j in 0..=6 {
            let eps = pow2_neg::<X::Scalar>(j);
            if !d.hi.lt(&f.modulus.eta(&eps)) {
                continue;
            }
            let v = if image.below(&eps, effort).is_yes() {
                Verdict::Pass
            } else if lower >= eps {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            };
            uniform = uniform.worst(v);
        }

        let isometric = (f.class == MapClass::Isometric).then(|| {
            if d.lo.is_positive() && image.below(&d.lo, effort).is_yes() {
                Verdict::Fail
            } else if lower >= d.lo.clone() - tol.clone() {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            }
        });

        for v in [metric, Some(uniform), isometric].into_iter().flatten() {
            verdict = verdict.worst(v);
        }
        pairs.push(PairCheck {
            a: f.source.render(a),
            b: f.source.render(b),
            source_distance: d.lo.to_string(),
            metric,
            uniform,
            isometric,
        });
    }
    ClassReport {
        label: f.label.clone(),
        claimed: f.class,
        effort,
        verdict,
        pairs,
        note: "certificates are spot-checked on the listed samples only",
    }
}

/// Uniform limit of a sequence of maps.
///
/// `modulus(eps)` must make `d(seq k (a), seq l (a)) < eps` for all
/// `k, l >= modulus(eps)` and all `a`. The certificate is probed at the
/// given sample points for `eps = 2^-j`, `j <= 4`.
pub fn limit_of_maps<X, Y, F, M>(
    source: X,
    target: Y,
    seq: F,
    modulus: M,
    samples: &[X::Point],
    effort: u32,
) -> Result<MapRep<X, Y>, MapError>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
    F: Fn(u32) -> MapRep<X, Y> + Send + Sync + 'static,
    M: Fn(&X::Scalar) -> u32 + Send + Sync + 'static,
{
    let memo: Arc<Mutex<HashMap<u32, MapRep<X, Y>>>> = Arc::new(Mutex::new(HashMap::new()));
    let seq = Arc::new(seq);
    let term = {
        let memo = memo.clone();
        move |k: u32| -> MapRep<X, Y> {
            if let Some(m) = memo.lock().expect("map memo poisoned").get(&k) {
                return m.clone();
            }
            let m = seq(k);
            memo.lock().expect("map memo poisoned").insert(k, m.clone());
            m
        }
    };
    let term = Arc::new(term);
    let modulus = Arc::new(modulus);
    let index = {
        let modulus = modulus.clone();
        move |eps: &X::Scalar| -> u32 {
            let mut k = 0;
            while pow2_neg::<X::Scalar>(k) > *eps {
                k += 1;
            }
            (0..=k).map(|j| modulus(&pow2_neg::<X::Scalar>(j))).max().unwrap_or(0)
        }
    };
    let index = Arc::new(index);

    for j in 0..=4 {
        let eps = pow2_neg::<X::Scalar>(j);
        let m = index(&eps);
        for a in samples {
            for (k, l) in [(m, m + 1), (m, m + 5)] {
                let pk = term(k).on_carrier(a);
                let pl = term(l).on_carrier(a);
                if !pk.distance(&pl)?.below(&eps, effort).is_yes() {
                    return Err(MapError::Certificate(format!(
                        "uniform Cauchy bound at eps {eps}, maps {k} and {l}, point {}",
                        source.render(a)
                    )));
                }
            }
        }
    }

    let class = (0..4).map(|k| term(k).class).min().unwrap_or(MapClass::Uniform);
    // d(f a, f b) <= 3 * eps/3 via the map at index(eps/3)
    let limit_modulus = {
        let term = term.clone();
        let index = index.clone();
        Modulus::new(move |eps: &X::Scalar| {
            let third = eps.clone() / X::Scalar::from_int(3);
            term(index(&third)).modulus.eta(&third)
        })
    };
    let tgt = target.clone();
    let carrier_map = {
        let term = term.clone();
        let index = index.clone();
        move |x: &X::Point| -> CompletionPoint<Y> {
            let term = term.clone();
            let index = index.clone();
            let x = x.clone();
            CompletionPoint::from_stages(tgt.clone(), move |n| {
                let k = index(&pow2_neg::<X::Scalar>(n + 1));
                term(k).on_carrier(&x).stage(n + 1)
            })
        }
    };
    Ok(MapRep::new(source, target, carrier_map, limit_modulus, class).with_label("limit"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::FormalBall;
    use crate::metric::RationalLine;
    use crate::numeric::Answer;
    use crate::Rational;

    type Line = RationalLine<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn pt(x: Rational) -> CompletionPoint<Line> {
        CompletionPoint::of_carrier(Line::new(), x)
    }

    fn scale(c: Rational) -> MapRep<Line, Line> {
        let abs = c.clone().abs();
        let (class, modulus) = if abs <= r(1, 1) {
            (MapClass::Metric, Modulus::identity())
        } else {
            (MapClass::Uniform, Modulus::linear(r(1, 1) / abs))
        };
        MapRep::from_point_map(Line::new(), Line::new(), move |x: &Rational| x.clone() * c.clone(), modulus, class)
    }

    fn shift(c: Rational) -> MapRep<Line, Line> {
        MapRep::from_point_map(
            Line::new(),
            Line::new(),
            move |x: &Rational| x.clone() + c.clone(),
            Modulus::identity(),
            MapClass::Isometric,
        )
    }

    fn identity() -> MapRep<Line, Line> {
        shift(r(0, 1))
    }

    fn close(p: &CompletionPoint<Line>, x: Rational, bits: u32) -> bool {
        p.distance(&pt(x)).unwrap().first_below(&pow2_neg(bits), bits + 8).is_some()
    }

    #[test]
    fn apply_examples() {
        let half = scale(r(1, 2));
        let img = half.apply(&pt(r(1, 1))).unwrap();
        assert!((img.stage(10) - r(1, 2)).abs() <= pow2_neg(10));

        let p = pt(r(2, 7));
        let same = identity().apply(&p).unwrap();
        for (c, rad) in [(r(0, 1), r(1, 2)), (r(1, 1), r(1, 2)), (r(2, 7), r(1, 99))] {
            let u = BallOpen::single(Line::new(), c, rad).unwrap();
            assert_eq!(same.member(&u, 32).unwrap(), p.member(&u, 32).unwrap());
        }

        let t = shift(r(10, 1));
        let (a, b) = (t.apply(&pt(r(0, 1))).unwrap(), t.apply(&pt(r(1, 1))).unwrap());
        assert_eq!(a.distance(&b).unwrap().less_than(&r(11, 10), 64).unwrap(), Answer::Yes);
    }

    #[test]
    fn compose_examples() {
        let quarter = compose_maps(&scale(r(1, 2)), &scale(r(1, 2))).unwrap();
        for x in [r(1, 1), r(-3, 5), r(8, 1)] {
            let img = quarter.apply(&pt(x.clone())).unwrap();
            assert!(close(&img, x / r(4, 1), 10));
        }
        let f = scale(r(1, 3));
        let idf = compose_maps(&identity(), &f).unwrap();
        for x in [r(1, 1), r(5, 2)] {
            let a = idf.apply(&pt(x.clone())).unwrap();
            let b = f.apply(&pt(x)).unwrap();
            assert!(a.distance(&b).unwrap().first_below(&pow2_neg(12), 24).is_some());
        }
        assert_eq!(compose_maps(&shift(r(1, 1)), &shift(r(2, 1))).unwrap().class(), MapClass::Isometric);
        assert_eq!(compose_maps(&scale(r(3, 1)), &shift(r(2, 1))).unwrap().class(), MapClass::Uniform);
    }

    #[test]
    fn classify_examples() {
        let samples = vec![(r(0, 1), r(1, 1)), (r(-2, 1), r(3, 1)), (r(1, 3), r(1, 2))];
        let rep = classify_map(&scale(r(1, 2)), &samples, 32);
        assert_eq!(rep.verdict, Verdict::Pass);

        let liar = MapRep::from_point_map(
            Line::new(),
            Line::new(),
            |x: &Rational| x.clone() * r(2, 1),
            Modulus::identity(),
            MapClass::Metric,
        );
        let rep = classify_map(&liar, &[(r(0, 1), r(1, 1))], 32);
        assert_eq!(rep.verdict, Verdict::Fail);
        assert_eq!(rep.pairs[0].metric, Some(Verdict::Fail));

        let rep = classify_map(&shift(r(10, 1)), &samples, 32);
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.pairs.iter().all(|p| p.isometric == Some(Verdict::Pass)));
    }

    #[test]
    fn extension_of_bounded_square() {
        let two = r(2, 1);
        let square = move |x: &Rational| {
            let c = x.clone().max(-two.clone()).min(two.clone());
            c.clone() * c
        };
        let samples: Vec<_> = (-8..=8)
            .flat_map(|i| (-8..=8).map(move |j| (r(i, 4), r(j, 4))))
            .collect();
        let f = extend_by_density(Line::new(), Line::new(), square, Modulus::linear(r(1, 4)), MapClass::Uniform, &samples)
            .unwrap()
            .with_region(FormalBall::new(r(0, 1), r(2, 1)).unwrap());
        let img = f.apply(&pt(r(3, 2))).unwrap();
        assert!(close(&img, r(9, 4), 16));
        assert_eq!(f.apply(&pt(r(3, 1))).unwrap_err(), MapError::OutsideRegion);
    }

    #[test]
    fn extension_rejects_bad_modulus() {
        let samples = vec![(r(0, 1), r(1, 2)), (r(0, 1), r(1, 1))];
        let res = extend_by_density(
            Line::new(),
            Line::new(),
            |x: &Rational| x.clone() * r(3, 1),
            Modulus::identity(),
            MapClass::Uniform,
            &samples,
        );
        assert!(matches!(res, Err(MapError::Certificate(_))));
    }

    #[test]
    fn extension_uniqueness_across_moduli() {
        let square = |x: &Rational| {
            let c = x.clone().max(r(-2, 1)).min(r(2, 1));
            c.clone() * c
        };
        let f = extend_by_density(Line::new(), Line::new(), square, Modulus::linear(r(1, 4)), MapClass::Uniform, &[]).unwrap();
        let g = extend_by_density(Line::new(), Line::new(), square, Modulus::linear(r(1, 8)), MapClass::Uniform, &[]).unwrap();
        // a genuinely irrational-ish probe: the limit 1 - 2^-k
        let probe = CompletionPoint::from_stages(Line::new(), |n| r(1, 1) - pow2_neg::<Rational>(n + 1));
        let (a, b) = (f.apply(&probe).unwrap(), g.apply(&probe).unwrap());
        assert!(a.distance(&b).unwrap().first_below(&pow2_neg(20), 40).is_some());
    }

    #[test]
    fn limit_of_shrinking_scalings_is_identity() {
        // seq k = x * (1 - 2^-k) on |x| <= 1
        let seq = |k: u32| {
            let c = r(1, 1) - pow2_neg::<Rational>(k);
            MapRep::from_point_map(
                Line::new(),
                Line::new(),
                move |x: &Rational| x.clone().max(r(-1, 1)).min(r(1, 1)) * c.clone(),
                Modulus::identity(),
                MapClass::Metric,
            )
        };
        let samples = [r(-1, 1), r(0, 1), r(1, 2), r(1, 1)];
        let modulus = |eps: &Rational| {
            let mut k = 0;
            while pow2_neg::<Rational>(k) >= *eps {
                k += 1;
            }
            k
        };
        let lim = limit_of_maps(Line::new(), Line::new(), seq, modulus, &samples, 64).unwrap();
        assert_eq!(lim.class(), MapClass::Metric);
        for x in [r(1, 1), r(-1, 3), r(0, 1)] {
            let img = lim.apply(&pt(x.clone())).unwrap();
            assert!(close(&img, x, 18));
        }
    }

    #[test]
    fn limit_of_constant_maps() {
        let seq = |k: u32| {
            let c = r(1, 1) - pow2_neg::<Rational>(k);
            MapRep::from_point_map(Line::new(), Line::new(), move |_: &Rational| c.clone(), Modulus::identity(), MapClass::Metric)
        };
        let modulus = |eps: &Rational| {
            let mut k = 0;
            while pow2_neg::<Rational>(k) >= *eps {
                k += 1;
            }
            k
        };
        let lim = limit_of_maps(Line::new(), Line::new(), seq, modulus, &[r(0, 1), r(5, 1)], 64).unwrap();
        assert!(close(&lim.apply(&pt(r(7, 1))).unwrap(), r(1, 1), 18));

        let constant = |_: u32| shift(r(1, 1));
        let lim = limit_of_maps(Line::new(), Line::new(), constant, |_: &Rational| 0, &[r(0, 1)], 64).unwrap();
        assert!(close(&lim.apply(&pt(r(2, 1))).unwrap(), r(3, 1), 18));
    }

    #[test]
    fn limit_of_diverging_maps_is_rejected() {
        let seq = |k: u32| shift(Rational::from_int(k as i64));
        let res = limit_of_maps(Line::new(), Line::new(), seq, |_: &Rational| 0, &[r(0, 1)], 64);
        assert!(matches!(res, Err(MapError::Certificate(_))));
    }

    #[test]
    fn modulus_is_monotone() {
        // deliberately non-monotone raw modulus
        let m = Modulus::new(|eps: &Rational| if *eps < r(1, 8) { eps.clone() * r(100, 1) } else { eps.clone() / r(2, 1) });
        let mut prev = m.eta(&r(1, 1));
        for j in 1..12 {
            let e = m.eta(&pow2_neg(j));
            assert!(e <= prev);
            prev = e;
        }
        assert!(m.eta(&r(1, 16)) <= r(1, 16));
    }
}
