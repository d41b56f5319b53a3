//! The locale of metric maps, presented by propositions `(U, V)`.
//!
//! A map `f` determines the point `(U, V)_f = "U meets f^-1(V)"`. This
//! module semi-decides those propositions, checks the six axioms on
//! concrete instances, and rebuilds preimages `tau_p(V)` from the
//! propositions alone.
//!
//! Source opens are searched over dyadic ball families; target candidates
//! are balls around stages of image points. Only soundness is claimed:
//! exhausting a candidate set gives `Inconclusive`, never `Fail`.

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::ball::{Ball, BallOpen, FormalBall};
use crate::completion::CompletionPoint;
use crate::maps::MapRep;
use crate::metric::{FiniteSpace, MetricCarrier, RationalLine};
use crate::numeric::{pow2, pow2_neg, Answer, Scalar, UpperReal};
use crate::report::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocaleError {
    #[error("malformed {axiom} instance: {reason}")]
    Malformed { axiom: &'static str, reason: String },
    #[error("opens and map live on different carriers")]
    CarrierMismatch,
}

/// The basic proposition `(u, v)`.
#[derive(Debug, Clone)]
pub struct PairProp<X: MetricCarrier, Y: MetricCarrier> {
    pub u: BallOpen<X>,
    pub v: BallOpen<Y>,
}

impl<X: MetricCarrier, Y: MetricCarrier> PairProp<X, Y> {
    pub fn new(u: BallOpen<X>, v: BallOpen<Y>) -> Self {
        PairProp { u, v }
    }
}

fn image<X, Y>(f: &MapRep<X, Y>, x: &X::Point) -> CompletionPoint<Y>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    f.apply_unchecked(&CompletionPoint::of_carrier(f.source().clone(), x.clone()))
}

/// The first center of `pp.u` whose image is a member of `pp.v`.
pub fn holds_witness<X, Y>(pp: &PairProp<X, Y>, f: &MapRep<X, Y>, effort: u32) -> Option<X::Point>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    if pp.u.carrier().id() != f.source().id() || pp.v.carrier().id() != f.target().id() {
        return None;
    }
    if pp.v.is_empty() {
        return None;
    }
    pp.u.balls().iter().find_map(|b| {
        let y = image(f, &b.center);
        match y.member(&pp.v, effort) {
            Ok(Answer::Yes) => Some(b.center.clone()),
            _ => None,
        }
    })
}

/// Semi-decides `(u, v)_f`: `Yes` when the image of some center of `u`
/// is a member of `v`. Opens on other carriers never hold.
pub fn holds<X, Y>(pp: &PairProp<X, Y>, f: &MapRep<X, Y>, effort: u32) -> Answer
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    Answer::from_bool(holds_witness(pp, f, effort).is_some())
}

/// Certifies that `y` lies outside every ball of `v`.
pub fn certified_outside<Y: MetricCarrier>(y: &CompletionPoint<Y>, v: &BallOpen<Y>, effort: u32) -> bool {
    v.balls().iter().all(|b| {
        (0..=effort).any(|n| {
            let lo = y.carrier().dist_lo(&y.stage(n), &b.center, n) - pow2_neg::<Y::Scalar>(n);
            lo >= b.radius
        })
    })
}

/// One axiom instance, with the opens and rationals it quantifies over.
#[derive(Debug, Clone)]
pub enum MmInstance<X: MetricCarrier, Y: MetricCarrier<Scalar = X::Scalar>> {
    /// `u_small <= u`, `v_small <= v`: `(u_small, v_small) |- (u, v)`.
    Mm1 { u_small: BallOpen<X>, u: BallOpen<X>, v_small: BallOpen<Y>, v: BallOpen<Y> },
    /// `(u, v) |- OR (u', v)` over `u' <= u` with diameter below `q`.
    Mm2 { u: BallOpen<X>, v: BallOpen<Y>, q: X::Scalar },
    /// `|- OR (u, v)` over `v` with diameter below `q`.
    Mm3 { u: BallOpen<X>, q: X::Scalar },
    /// `(u, v) |- OR (u, v')` over `v'` well inside `v`.
    Mm4 { u: BallOpen<X>, v: BallOpen<Y> },
    /// Gluing: diameters of `w1`, `w2` below `q1`, `q2`, `v1' <|q1 v1`,
    /// `v2' <|q2 v2`, `tau <= w1, w2`.
    Mm5 {
        w1: BallOpen<X>,
        w2: BallOpen<X>,
        tau: BallOpen<X>,
        q1: X::Scalar,
        q2: X::Scalar,
        v1: BallOpen<Y>,
        v2: BallOpen<Y>,
        v1p: BallOpen<Y>,
        v2p: BallOpen<Y>,
    },
    /// `(u, v) & (u, v') |- diam(v | v') <= diam(u) + diam(v) + diam(v')`.
    Mm6 { u: BallOpen<X>, v: BallOpen<Y>, vp: BallOpen<Y> },
}

impl<X: MetricCarrier, Y: MetricCarrier<Scalar = X::Scalar>> MmInstance<X, Y> {
    pub fn tag(&self) -> &'static str {
        match self {
            MmInstance::Mm1 { .. } => "MM1",
            MmInstance::Mm2 { .. } => "MM2",
            MmInstance::Mm3 { .. } => "MM3",
            MmInstance::Mm4 { .. } => "MM4",
            MmInstance::Mm5 { .. } => "MM5",
            MmInstance::Mm6 { .. } => "MM6",
        }
    }
}

/// Result of one axiom check.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub axiom: &'static str,
    pub result: Verdict,
    pub effort: u32,
    pub premises_hold: bool,
    pub witness: Value,
}

fn report(axiom: &'static str, result: Verdict, effort: u32, premises_hold: bool, witness: Value) -> AxiomReport {
    AxiomReport { axiom, result, effort, premises_hold, witness }
}

fn malformed(axiom: &'static str, reason: &str) -> LocaleError {
    LocaleError::Malformed { axiom, reason: reason.to_string() }
}

fn require(axiom: &'static str, ok: bool, reason: &str) -> Result<(), LocaleError> {
    if ok {
        Ok(())
    } else {
        Err(malformed(axiom, reason))
    }
}

fn single<C: MetricCarrier>(carrier: &C, center: C::Point, radius: C::Scalar) -> BallOpen<C> {
    BallOpen::new(carrier.clone(), vec![FormalBall { center, radius }]).expect("positive radius")
}

fn diam_below<C: MetricCarrier>(u: &BallOpen<C>, q: &C::Scalar, effort: u32) -> bool {
    q.is_positive() && u.diameter_upper().below(q, effort).is_yes()
}

fn included<C: MetricCarrier>(a: &BallOpen<C>, b: &BallOpen<C>, effort: u32) -> bool {
    a.included_in(b, effort).map(Answer::is_yes).unwrap_or(false)
}

/// Checks one axiom instance against the point `(.,.)_f`.
///
/// Side conditions are verified first at `effort`; instances that do not
/// meet them are rejected. A premise that does not hold makes the
/// instance vacuously `Pass`, reported with `premises_hold: false`.
pub fn check_axiom<X, Y>(inst: &MmInstance<X, Y>, f: &MapRep<X, Y>, effort: u32) -> Result<AxiomReport, LocaleError>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
{
    let src = f.source().id();
    let tgt = f.target().id();
    let tag = inst.tag();
    let on = |u: &BallOpen<X>| u.carrier().id() == src;
    let onto = |v: &BallOpen<Y>| v.carrier().id() == tgt;
    let vacuous = || Ok(report(tag, Verdict::Pass, effort, false, Value::Null));

    match inst {
        MmInstance::Mm1 { u_small, u, v_small, v } => {
            if !(on(u_small) && on(u) && onto(v_small) && onto(v)) {
                return Err(LocaleError::CarrierMismatch);
            }
            require(tag, included(u_small, u, effort), "u' is not included in u")?;
            require(tag, included(v_small, v, effort), "v' is not included in v")?;
            let Some(x) = holds_witness(&PairProp::new(u_small.clone(), v_small.clone()), f, effort) else {
                return vacuous();
            };
            let y = image(f, &x);
            let witness = json!({ "x": f.source().render(&x) });
            if y.member(v, effort).map(Answer::is_yes).unwrap_or(false)
                || holds(&PairProp::new(u.clone(), v.clone()), f, effort).is_yes()
            {
                Ok(report(tag, Verdict::Pass, effort, true, witness))
            } else if certified_outside(&y, v, effort) {
                Ok(report(tag, Verdict::Fail, effort, true, witness))
            } else {
                Ok(report(tag, Verdict::Inconclusive, effort, true, witness))
            }
        }
        MmInstance::Mm2 { u, v, q } => {
            if !(on(u) && onto(v)) {
                return Err(LocaleError::CarrierMismatch);
            }
            require(tag, q.is_positive(), "q must be positive")?;
            let Some(x) = holds_witness(&PairProp::new(u.clone(), v.clone()), f, effort) else {
                return vacuous();
            };
            let r = u
                .balls()
                .iter()
                .find(|b| b.center == x)
                .map(|b| b.radius.clone())
                .expect("witness is a center of u");
            let s = (q.clone() / X::Scalar::from_int(4)).min(r);
            let small = single(f.source(), x.clone(), s);
            let found = included(&small, u, effort)
                && diam_below(&small, q, effort)
                && holds(&PairProp::new(small.clone(), v.clone()), f, effort).is_yes();
            let verdict = if found { Verdict::Pass } else { Verdict::Inconclusive };
            Ok(report(tag, verdict, effort, true, json!({ "u": small.to_json() })))
        }
        MmInstance::Mm3 { u, q } => {
            if !on(u) {
                return Err(LocaleError::CarrierMismatch);
            }
            require(tag, q.is_positive(), "q must be positive")?;
            require(tag, u.is_positive(), "u must be positive")?;
            let s = q.clone() / X::Scalar::from_int(4);
            for b in u.balls() {
                let y = image(f, &b.center);
                for n in 0..=effort {
                    if pow2_neg::<X::Scalar>(n) * X::Scalar::from_int(2) >= s {
                        continue;
                    }
                    let v = single(f.target(), y.stage(n), s.clone());
                    if diam_below(&v, q, effort) && holds(&PairProp::new(u.clone(), v.clone()), f, effort).is_yes() {
                        return Ok(report(tag, Verdict::Pass, effort, true, json!({ "v": v.to_json() })));
                    }
                    break;
                }
            }
            Ok(report(tag, Verdict::Inconclusive, effort, true, Value::Null))
        }
        MmInstance::Mm4 { u, v } => {
            if !(on(u) && onto(v)) {
                return Err(LocaleError::CarrierMismatch);
            }
            let Some(x) = holds_witness(&PairProp::new(u.clone(), v.clone()), f, effort) else {
                return vacuous();
            };
            let y = image(f, &x);
            for n in 0..=effort {
                let vp = single(f.target(), y.stage(n), pow2_neg::<X::Scalar>(n) * X::Scalar::from_int(2));
                if vp.strictly_inside(v, effort).map(Answer::is_yes).unwrap_or(false)
                    && holds(&PairProp::new(u.clone(), vp.clone()), f, effort).is_yes()
                {
                    return Ok(report(tag, Verdict::Pass, effort, true, json!({ "v": vp.to_json() })));
                }
            }
            Ok(report(tag, Verdict::Inconclusive, effort, true, Value::Null))
        }
        MmInstance::Mm5 { w1, w2, tau, q1, q2, v1, v2, v1p, v2p } => {
            if !(on(w1) && on(w2) && on(tau) && onto(v1) && onto(v2) && onto(v1p) && onto(v2p)) {
                return Err(LocaleError::CarrierMismatch);
            }
            require(tag, diam_below(w1, q1, effort), "diameter of w1 not below q1")?;
            require(tag, diam_below(w2, q2, effort), "diameter of w2 not below q2")?;
            let inside = |a: &BallOpen<Y>, q: &X::Scalar, b: &BallOpen<Y>| {
                a.way_inside(q, b, effort).map(Answer::is_yes).unwrap_or(false)
            };
            require(tag, inside(v1p, q1, v1), "v1' is not well inside v1 at q1")?;
            require(tag, inside(v2p, q2, v2), "v2' is not well inside v2 at q2")?;
            require(tag, tau.is_positive(), "tau must be positive")?;
            require(tag, included(tau, w1, effort) && included(tau, w2, effort), "tau is not below w1 and w2")?;

            let p1 = holds(&PairProp::new(w1.clone(), v1p.clone()), f, effort);
            let p2 = holds(&PairProp::new(w2.clone(), v2p.clone()), f, effort);
            if !(p1.is_yes() && p2.is_yes()) {
                return vacuous();
            }
            for b in tau.balls() {
                let y = image(f, &b.center);
                if certified_outside(&y, v1, effort) || certified_outside(&y, v2, effort) {
                    let witness = json!({ "tau_center": f.source().render(&b.center) });
                    return Ok(report(tag, Verdict::Fail, effort, true, witness));
                }
            }
            for b in tau.balls() {
                let y = image(f, &b.center);
                for n in 0..=effort {
                    let v = single(f.target(), y.stage(n), pow2_neg::<X::Scalar>(n) * X::Scalar::from_int(2));
                    if included(&v, v1, effort)
                        && included(&v, v2, effort)
                        && holds(&PairProp::new(tau.clone(), v.clone()), f, effort).is_yes()
                    {
                        return Ok(report(tag, Verdict::Pass, effort, true, json!({ "v": v.to_json() })));
                    }
                }
            }
            Ok(report(tag, Verdict::Inconclusive, effort, true, Value::Null))
        }
        MmInstance::Mm6 { u, v, vp } => {
            if !(on(u) && onto(v) && onto(vp)) {
                return Err(LocaleError::CarrierMismatch);
            }
            let w1 = holds_witness(&PairProp::new(u.clone(), v.clone()), f, effort);
            let w2 = holds_witness(&PairProp::new(u.clone(), vp.clone()), f, effort);
            let (Some(x), Some(xp)) = (w1, w2) else {
                return vacuous();
            };
            let joined = v.union(vp).map_err(|_| LocaleError::CarrierMismatch)?;
            let lhs = joined.diameter_upper().bound(effort);
            let rhs = UpperReal::sum_all([u.diameter_upper(), v.diameter_upper(), vp.diameter_upper()]).bound(effort);
            let apart = image(f, &x).distance_lower(&image(f, &xp), effort);
            let witness = json!({
                "lhs": lhs.to_string(),
                "rhs": rhs.to_string(),
                "image_distance_lower": apart.to_string(),
            });
            let verdict = if !rhs.lt(&apart) && lhs <= rhs {
                Verdict::Pass
            } else if rhs.lt(&apart) {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            };
            Ok(report(tag, verdict, effort, true, witness))
        }
    }
}

/// A family of source balls, growing (never shrinking) with effort.
pub trait BallGrid<X: MetricCarrier>: Sync {
    fn carrier(&self) -> X;

    fn balls(&self, effort: u32) -> Vec<Ball<X>>;

    /// Descriptor recorded in reports.
    fn describe(&self) -> Value;
}

/// Dyadic balls `b(k 2^-j, 2^-j)` with centers in `[lo, hi]`, for
/// `j <= min(max_bits, 1 + effort / 64)`.
#[derive(Debug, Clone)]
pub struct LineGrid<S> {
    pub lo: S,
    pub hi: S,
    pub max_bits: u32,
}

impl<S: Scalar> LineGrid<S> {
    pub fn new(lo: S, hi: S, max_bits: u32) -> Self {
        LineGrid { lo, hi, max_bits }
    }

    fn bits(&self, effort: u32) -> u32 {
        self.max_bits.min(1 + effort / 64)
    }
}

impl<S: Scalar> BallGrid<RationalLine<S>> for LineGrid<S> {
    fn carrier(&self) -> RationalLine<S> {
        RationalLine::new()
    }

    fn balls(&self, effort: u32) -> Vec<Ball<RationalLine<S>>> {
        let mut out = Vec::new();
        for j in 0..=self.bits(effort) {
            let h = pow2_neg::<S>(j);
            let mut c = (self.lo.clone() / h.clone()).ceil() * h.clone();
            while c <= self.hi {
                out.push(FormalBall { center: c.clone(), radius: h.clone() });
                c = c + h.clone();
            }
        }
        out
    }

    fn describe(&self) -> Value {
        json!({ "family": "dyadic line balls", "lo": self.lo.to_string(), "hi": self.hi.to_string(), "max_bits": self.max_bits })
    }
}

/// Every point of a finite space with radii `2^j`, `-bits <= j <= 4`,
/// where `bits = min(max_bits, 1 + effort / 64)`.
#[derive(Debug, Clone)]
pub struct FiniteGrid<S> {
    pub space: FiniteSpace<S>,
    pub max_bits: u32,
}

impl<S: Scalar> BallGrid<FiniteSpace<S>> for FiniteGrid<S> {
    fn carrier(&self) -> FiniteSpace<S> {
        self.space.clone()
    }

    fn balls(&self, effort: u32) -> Vec<Ball<FiniteSpace<S>>> {
        let bits = self.max_bits.min(1 + effort / 64);
        let mut radii: Vec<S> = (1..=bits).map(pow2_neg::<S>).collect();
        radii.extend((0..=4).map(pow2::<S>));
        self.space
            .points()
            .flat_map(|x| radii.iter().map(move |r| FormalBall { center: x, radius: r.clone() }))
            .collect()
    }

    fn describe(&self) -> Value {
        json!({ "family": "finite space balls", "n": self.space.len(), "max_bits": self.max_bits })
    }
}

/// Rebuilds an under-approximation of `tau_p(v)` from a proposition
/// oracle: the union of grid balls `W = b(w, s)` for which the oracle
/// affirms `(W, V')` with `V' = b(c, R - 3s)` for a ball `b(c, R)` of `v`.
/// Then `diam(W) <= 2s < 3s` and `V' <|_(3s) v`.
pub fn tau_from_point<X, Y, O, G>(oracle: O, v: &BallOpen<Y>, grid: &G, effort: u32) -> BallOpen<X>
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
    O: Fn(&PairProp<X, Y>, u32) -> Answer + Sync,
    G: BallGrid<X> + ?Sized,
    X::Point: Sync,
{
    let candidates = grid.balls(effort);
    let source = grid.carrier();
    let three = X::Scalar::from_int(3);
    let chosen: Vec<Ball<X>> = candidates
        .par_iter()
        .filter(|w| {
            let q = w.radius.clone() * three.clone();
            let wopen = single(&source, w.center.clone(), w.radius.clone());
            if !diam_below(&wopen, &q, effort) {
                return false;
            }
            v.balls().iter().any(|b| {
                let shrunk = b.radius.clone() - q.clone();
                if !shrunk.is_positive() {
                    return false;
                }
                let vp = single(v.carrier(), b.center.clone(), shrunk);
                let well_inside = vp.way_inside(&q, v, effort).map(Answer::is_yes).unwrap_or(false);
                well_inside && oracle(&PairProp::new(wopen.clone(), vp), effort).is_yes()
            })
        })
        .cloned()
        .collect();
    BallOpen::new(source, chosen).expect("grid balls are valid")
}


/// Outcome of comparing `tau_p(v)` with the true preimage on probes.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTripReport {
    pub verdict: Verdict,
    pub effort: u32,
    pub probes: usize,
    /// Probes whose image is a member of `v`.
    pub in_preimage: usize,
    /// Of those, probes that are also members of the rebuilt `tau`.
    pub covered: usize,
    pub coverage_percent: u32,
    /// Probes in `tau` whose image is certified outside `v`.
    pub violations: Vec<Value>,
    /// Probes in `tau` whose image is neither confirmed in nor out of `v`.
    pub unconfirmed: usize,
    pub tau_balls: usize,
    pub grid: Value,
}

/// Rebuilds `tau` from `holds(., f)` and checks it against `f^-1(v)`.
///
/// Soundness (`p` in `tau` implies `f(p)` in `v`) is a hard check; the
/// converse is reported as coverage, which depends on the grid.
pub fn round_trip<X, Y, G>(
    f: &MapRep<X, Y>,
    v: &BallOpen<Y>,
    probes: &[CompletionPoint<X>],
    grid: &G,
    effort: u32,
) -> RoundTripReport
where
    X: MetricCarrier,
    Y: MetricCarrier<Scalar = X::Scalar>,
    G: BallGrid<X> + ?Sized,
{
    let tau = tau_from_point(|pp: &PairProp<X, Y>, e| holds(pp, f, e), v, grid, effort);
    let rows: Vec<(bool, bool, bool)> = probes
        .par_iter()
        .map(|p| {
            let in_tau = p.member(&tau, effort).map(Answer::is_yes).unwrap_or(false);
            let img = f.apply_unchecked(p);
            let in_v = img.member(v, effort).map(Answer::is_yes).unwrap_or(false);
            let out = !in_v && in_tau && certified_outside(&img, v, effort);
            (in_tau, in_v, out)
        })
        .collect();
    let mut violations = Vec::new();
    let (mut in_preimage, mut covered, mut unconfirmed) = (0, 0, 0);
    for (p, &(in_tau, in_v, out)) in probes.iter().zip(&rows) {
        if in_v {
            in_preimage += 1;
            if in_tau {
                covered += 1;
            }
        }
        if out {
            let stages: Vec<Value> = p.prefix(4).iter().map(|x| p.carrier().render(x)).collect();
            violations.push(json!({ "probe_stages": stages }));
        } else if in_tau && !in_v {
            unconfirmed += 1;
        }
    }
    let coverage_percent = if in_preimage == 0 { 100 } else { (covered * 100 / in_preimage) as u32 };
    let verdict = if !violations.is_empty() {
        Verdict::Fail
    } else if unconfirmed > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    RoundTripReport {
        verdict,
        effort,
        probes: probes.len(),
        in_preimage,
        covered,
        coverage_percent,
        violations,
        unconfirmed,
        tau_balls: tau.len(),
        grid: grid.describe(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{MapClass, Modulus};
    use crate::Rational;

    type Line = RationalLine<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn ball(c: Rational, rad: Rational) -> BallOpen<Line> {
        BallOpen::single(Line::new(), c, rad).unwrap()
    }

    fn affine(a: Rational, b: Rational, class: MapClass) -> MapRep<Line, Line> {
        MapRep::from_point_map(Line::new(), Line::new(), move |x: &Rational| x.clone() * a.clone() + b.clone(), Modulus::identity(), class)
    }

    fn id() -> MapRep<Line, Line> {
        affine(r(1, 1), r(0, 1), MapClass::Isometric)
    }

    fn half() -> MapRep<Line, Line> {
        affine(r(1, 2), r(0, 1), MapClass::Metric)
    }

    fn shift() -> MapRep<Line, Line> {
        affine(r(1, 1), r(10, 1), MapClass::Isometric)
    }

    fn pt(x: Rational) -> CompletionPoint<Line> {
        CompletionPoint::of_carrier(Line::new(), x)
    }

    #[test]
    fn holds_examples() {
        let pp = PairProp::new(ball(r(0, 1), r(1, 1)), ball(r(0, 1), r(2, 1)));
        assert_eq!(holds(&pp, &id(), 8), Answer::Yes);
        for e in [0, 16, 256] {
            assert_eq!(holds(&pp, &shift(), e), Answer::NotYet);
        }
        let empty = PairProp::new(ball(r(0, 1), r(1, 1)), BallOpen::empty(Line::new()));
        assert_eq!(holds(&empty, &id(), 64), Answer::NotYet);
    }

    #[test]
    fn axiom_examples() {
        let mm1 = MmInstance::Mm1 {
            u_small: ball(r(0, 1), r(1, 2)),
            u: ball(r(0, 1), r(1, 1)),
            v_small: ball(r(0, 1), r(1, 1)),
            v: ball(r(1, 2), r(2, 1)),
        };
        let rep = check_axiom(&mm1, &id(), 32).unwrap();
        assert_eq!((rep.result, rep.premises_hold), (Verdict::Pass, true));

        let mm6 = MmInstance::Mm6 { u: ball(r(0, 1), r(1, 2)), v: ball(r(0, 1), r(1, 2)), vp: ball(r(0, 1), r(1, 2)) };
        let rep = check_axiom(&mm6, &half(), 32).unwrap();
        assert_eq!(rep.result, Verdict::Pass);
        assert_eq!(rep.witness["lhs"], "1");
        assert_eq!(rep.witness["rhs"], "3");

        let mm3 = MmInstance::Mm3 { u: ball(r(0, 1), r(1, 1)), q: r(1, 4) };
        let rep = check_axiom(&mm3, &half(), 32).unwrap();
        assert_eq!(rep.result, Verdict::Pass);
        assert_eq!(rep.witness["v"]["balls"][0]["c"], "0");
        assert_eq!(rep.witness["v"]["balls"][0]["r"], "1/16");
    }

    #[test]
    fn remaining_axioms_pass_on_metric_maps() {
        let f = half();
        let mm2 = MmInstance::Mm2 { u: ball(r(1, 1), r(1, 1)), v: ball(r(0, 1), r(1, 1)), q: r(1, 8) };
        assert_eq!(check_axiom(&mm2, &f, 32).unwrap().result, Verdict::Pass);
        let mm4 = MmInstance::Mm4 { u: ball(r(1, 1), r(1, 1)), v: ball(r(0, 1), r(1, 1)) };
        assert_eq!(check_axiom(&mm4, &f, 32).unwrap().result, Verdict::Pass);
        let mm5 = MmInstance::Mm5 {
            w1: ball(r(0, 1), r(1, 4)),
            w2: ball(r(1, 8), r(1, 4)),
            tau: ball(r(1, 16), r(1, 16)),
            q1: r(3, 4),
            q2: r(3, 4),
            v1: ball(r(0, 1), r(1, 1)),
            v2: ball(r(1, 4), r(1, 1)),
            v1p: ball(r(0, 1), r(1, 4)),
            v2p: ball(r(1, 4), r(1, 4)),
        };
        let rep = check_axiom(&mm5, &f, 32).unwrap();
        assert_eq!((rep.result, rep.premises_hold), (Verdict::Pass, true));
    }

    #[test]
    fn malformed_instances_are_rejected() {
        let bad = MmInstance::Mm1 {
            u_small: ball(r(0, 1), r(2, 1)),
            u: ball(r(0, 1), r(1, 1)),
            v_small: ball(r(0, 1), r(1, 1)),
            v: ball(r(0, 1), r(1, 1)),
        };
        assert!(matches!(check_axiom(&bad, &id(), 8), Err(LocaleError::Malformed { axiom: "MM1", .. })));
    }

    #[test]
    fn non_metric_map_is_caught_by_mm6() {
        let triple = affine(r(3, 1), r(0, 1), MapClass::Metric);
        let inst = MmInstance::Mm6 {
            u: BallOpen::new(Line::new(), vec![FormalBall::new(r(0, 1), r(1, 8)).unwrap(), FormalBall::new(r(2, 1), r(1, 8)).unwrap()]).unwrap(),
            v: ball(r(0, 1), r(1, 8)),
            vp: ball(r(6, 1), r(1, 8)),
        };
        // u spans about 2.25 but the images sit 6 apart
        assert_eq!(check_axiom(&inst, &triple, 32).unwrap().result, Verdict::Fail);
    }

    #[test]
    fn tau_examples() {
        let grid = LineGrid::new(r(-12, 1), r(4, 1), 3);
        let v = ball(r(0, 1), r(2, 1));
        let tau = tau_from_point(|pp: &PairProp<Line, Line>, e| holds(pp, &id(), e), &v, &grid, 64);
        assert!(ball(r(0, 1), r(1, 2)).included_in(&tau, 0).unwrap().is_yes());

        let never = tau_from_point(|_: &PairProp<Line, Line>, _| Answer::NotYet, &v, &grid, 64);
        assert!(never.is_empty());

        let tau = tau_from_point(|pp: &PairProp<Line, Line>, e| holds(pp, &shift(), e), &v, &grid, 64);
        assert!(ball(r(-10, 1), r(1, 2)).included_in(&tau, 0).unwrap().is_yes());
    }

    #[test]
    fn tau_grows_with_effort() {
        let grid = LineGrid::new(r(-4, 1), r(4, 1), 4);
        let v = ball(r(1, 3), r(1, 1));
        let small = tau_from_point(|pp: &PairProp<Line, Line>, e| holds(pp, &half(), e), &v, &grid, 16);
        let big = tau_from_point(|pp: &PairProp<Line, Line>, e| holds(pp, &half(), e), &v, &grid, 200);
        assert!(small.len() <= big.len());
        assert!(small.balls().iter().all(|b| big.balls().contains(b)));
    }

    #[test]
    fn round_trip_examples() {
        let grid = LineGrid::new(r(-12, 1), r(4, 1), 4);
        let rep = round_trip(&id(), &ball(r(0, 1), r(2, 1)), &[pt(r(0, 1))], &grid, 64);
        assert_eq!((rep.verdict, rep.covered, rep.in_preimage), (Verdict::Pass, 1, 1));

        let rep = round_trip(&half(), &ball(r(0, 1), r(1, 1)), &[pt(r(3, 2))], &grid, 256);
        assert_eq!((rep.verdict, rep.covered), (Verdict::Pass, 1));

        let rep = round_trip(&shift(), &ball(r(0, 1), r(1, 1)), &[pt(r(0, 1))], &grid, 64);
        assert_eq!((rep.verdict, rep.in_preimage, rep.covered), (Verdict::Pass, 0, 0));
    }
}
