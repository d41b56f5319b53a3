//! Finite discrete spaces: basic opens of the locale of real functions,
//! the sup-norm algebra `C^n`, its characters and the duality round trip.
//!
//! On a finite discrete space every subset is open, `¬U` is the
//! complement, and the constraints of a basic open can be solved pointwise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::numeric::{pow2_neg, Answer, Scalar, UpperReal};
use crate::reals::{ComplexPoint, RealError};
use crate::report::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GelfandError {
    #[error("point {index} is out of range for a space of {n} points")]
    OutOfRange { index: usize, n: usize },
    #[error("spaces are limited to 1..=63 points, got {0}")]
    BadSize(usize),
    #[error("elements have {0} and {1} coordinates")]
    LengthMismatch(usize, usize),
    #[error("at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Bound(#[from] RealError),
}

fn schema(path: &str, message: impl Into<String>) -> GelfandError {
    GelfandError::Schema { path: path.to_string(), message: message.into() }
}

/// The discrete space `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscreteSpace {
    pub n: usize,
}

impl DiscreteSpace {
    pub fn new(n: usize) -> Result<Self, GelfandError> {
        if n == 0 || n > 63 {
            return Err(GelfandError::BadSize(n));
        }
        Ok(DiscreteSpace { n })
    }

    /// Bitmask of the whole space.
    pub fn full(&self) -> u64 {
        (1u64 << self.n) - 1
    }
}

/// Subset of a discrete space as a bitmask.
pub type Subset = u64;

pub fn subset_of(points: &[usize]) -> Subset {
    points.iter().fold(0, |m, &i| m | (1u64 << i))
}

pub fn subset_points(s: Subset) -> Vec<usize> {
    (0..64).filter(|i| s & (1u64 << i) != 0).collect()
}

/// `AND (U_i, u_i, -) & AND (V_j, v_j, +)`: functions with `f < u_i` on
/// `U_i` and `f > v_j` on `V_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicOpenXR<S> {
    pub lowers: Vec<(Subset, S)>,
    pub uppers: Vec<(Subset, S)>,
}

impl<S: Scalar> BasicOpenXR<S> {
    pub fn new(lowers: Vec<(Subset, S)>, uppers: Vec<(Subset, S)>) -> Self {
        BasicOpenXR { lowers, uppers }
    }

    fn check(&self, x: &DiscreteSpace) -> Result<(), GelfandError> {
        for (s, _) in self.lowers.iter().chain(&self.uppers) {
            if s & !x.full() != 0 {
                let index = subset_points(*s).into_iter().find(|&i| i >= x.n).unwrap_or(x.n);
                return Err(GelfandError::OutOfRange { index, n: x.n });
            }
        }
        Ok(())
    }

    /// Whether `f` meets every constraint strictly.
    pub fn satisfied_by(&self, f: &[S]) -> bool {
        let low = self
            .lowers
            .iter()
            .all(|(s, u)| subset_points(*s).into_iter().all(|x| f[x] < *u));
        let up = self
            .uppers
            .iter()
            .all(|(s, v)| subset_points(*s).into_iter().all(|x| f[x] > *v));
        low && up
    }

    pub fn to_json(&self, x: &DiscreteSpace) -> Value {
        let side = |cs: &[(Subset, S)]| -> Vec<Value> {
            cs.iter()
                .map(|(s, q)| json!({ "set": subset_points(*s), "bound": q.to_string() }))
                .collect()
        };
        json!({ "n": x.n, "lowers": side(&self.lowers), "uppers": side(&self.uppers) })
    }

    /// Parses `{"n": 2, "lowers": [{"set": [0], "bound": "0"}], "uppers": [...]}`.
    pub fn from_json(v: &Value) -> Result<(DiscreteSpace, Self), GelfandError> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema("$.n", "expected a positive integer"))?;
        let space = DiscreteSpace::new(n as usize).map_err(|e| schema("$.n", e.to_string()))?;
        let side = |key: &str| -> Result<Vec<(Subset, S)>, GelfandError> {
            let Some(items) = v.get(key) else { return Ok(Vec::new()) };
            let items = items.as_array().ok_or_else(|| schema(&format!("$.{key}"), "expected an array"))?;
            items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    let path = format!("$.{key}[{i}]");
                    let set = item
                        .get("set")
                        .and_then(Value::as_array)
                        .ok_or_else(|| schema(&format!("{path}.set"), "expected an array of point indices"))?;
                    let mut mask = 0u64;
                    for (k, p) in set.iter().enumerate() {
                        let p = p
                            .as_u64()
                            .ok_or_else(|| schema(&format!("{path}.set[{k}]"), "expected a point index"))?;
                        if p as usize >= space.n {
                            return Err(schema(&format!("{path}.set[{k}]"), format!("index {p} out of range")));
                        }
                        mask |= 1u64 << p;
                    }
                    let bound = match item.get("bound") {
                        Some(Value::String(s)) => S::parse(s),
                        Some(Value::Number(x)) => S::parse(&x.to_string()),
                        _ => None,
                    }
                    .ok_or_else(|| schema(&format!("{path}.bound"), "expected a rational like \"-3/2\""))?;
                    Ok((mask, bound))
                })
                .collect()
        };
        let lowers = side("lowers")?;
        let uppers = side("uppers")?;
        Ok((space, BasicOpenXR { lowers, uppers }))
    }
}

/// For all `i, j` with `u_i <= v_j`, `U_i` and `V_j` are disjoint.
pub fn is_admissible<S: Scalar>(b: &BasicOpenXR<S>, x: &DiscreteSpace) -> Result<bool, GelfandError> {
    b.check(x)?;
    Ok(b.lowers.iter().all(|(us, u)| {
        b.uppers.iter().all(|(vs, v)| u > v || us & vs == 0)
    }))
}

/// A point of the basic open, solved pointwise: at `x` the value must lie
/// strictly between `max{v_j : x in V_j}` and `min{u_i : x in U_i}`. The
/// witness is the midpoint, one step beyond the single finite side, or 0.
pub fn has_point<S: Scalar>(b: &BasicOpenXR<S>, x: &DiscreteSpace) -> Result<Option<Vec<S>>, GelfandError> {
    b.check(x)?;
    let mut f = Vec::with_capacity(x.n);
    for p in 0..x.n {
        let bit = 1u64 << p;
        let hi = b.lowers.iter().filter(|(s, _)| s & bit != 0).map(|(_, u)| u.clone()).min();
        let lo = b.uppers.iter().filter(|(s, _)| s & bit != 0).map(|(_, v)| v.clone()).max();
        let value = match (lo, hi) {
            (Some(lo), Some(hi)) if lo < hi => (lo + hi) / S::from_int(2),
            (Some(_), Some(_)) => return Ok(None),
            (None, Some(hi)) => hi - S::one(),
            (Some(lo), None) => lo + S::one(),
            (None, None) => S::zero(),
        };
        f.push(value);
    }
    Ok(Some(f))
}

/// How [`admissibility_theorem_check`] chooses instances.
#[derive(Debug, Clone)]
pub enum Enumeration<S> {
    /// Every multiset of at most `per_side` constraints per side, each a
    /// subset of the space (the empty one included) with a bound from `grid`.
    Exhaustive { grid: Vec<S>, per_side: usize },
    /// `count` instances with up to `per_side` constraints per side.
    Random { grid: Vec<S>, per_side: usize, count: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub verdict: Verdict,
    pub n: usize,
    pub instances: usize,
    pub admissible: usize,
    pub discrepancies: usize,
    /// Witness points that do not actually satisfy their basic open.
    pub bad_witnesses: usize,
    pub first_discrepancy: Option<Value>,
}

fn multisets<T: Clone>(atoms: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(usize, Vec<T>)> = vec![(0, Vec::new())];
    for _ in 0..max {
        let mut next = Vec::new();
        for (start, prefix) in &frontier {
            for (k, a) in atoms.iter().enumerate().skip(*start) {
                let mut m = prefix.clone();
                m.push(a.clone());
                out.push(m.clone());
                next.push((k, m));
            }
        }
        frontier = next;
    }
    out
}

fn random_instance<S: Scalar>(rng: &mut ChaCha8Rng, x: &DiscreteSpace, grid: &[S], per_side: usize) -> BasicOpenXR<S> {
    let side = |rng: &mut ChaCha8Rng| -> Vec<(Subset, S)> {
        let k = rng.gen_range(0..=per_side);
        (0..k)
            .map(|_| {
                let s = rng.gen_range(0..=x.full());
                (s, grid.choose(rng).expect("non-empty grid").clone())
            })
            .collect()
    };
    let lowers = side(rng);
    let uppers = side(rng);
    BasicOpenXR { lowers, uppers }
}

/// Checks "admissible iff it has a point" over an enumeration, and that
/// every returned point satisfies its basic open.
pub fn admissibility_theorem_check<S: Scalar>(x: &DiscreteSpace, how: &Enumeration<S>) -> TheoremReport {
    let instances: Vec<BasicOpenXR<S>> = match how {
        Enumeration::Exhaustive { grid, per_side } => {
            let atoms: Vec<(Subset, S)> = (0..=x.full())
                .flat_map(|s| grid.iter().map(move |q| (s, q.clone())))
                .collect();
            let sides = multisets(&atoms, *per_side);
            let mut all = Vec::with_capacity(sides.len() * sides.len());
            for l in &sides {
                for u in &sides {
                    all.push(BasicOpenXR { lowers: l.clone(), uppers: u.clone() });
                }
            }
            all
        }
        Enumeration::Random { grid, per_side, count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count).map(|_| random_instance(&mut rng, x, grid, *per_side)).collect()
        }
    };
    let rows: Vec<(bool, bool, bool)> = instances
        .par_iter()
        .map(|b| {
            let adm = is_admissible(b, x).expect("enumerated subsets are in range");
            let point = has_point(b, x).expect("enumerated subsets are in range");
            let good = point.as_ref().map_or(true, |f| b.satisfied_by(f));
            (adm, point.is_some(), good)
        })
        .collect();
    let mut first = None;
    let (mut admissible, mut discrepancies, mut bad_witnesses) = (0, 0, 0);
    for (b, &(adm, pt, good)) in instances.iter().zip(&rows) {
        admissible += adm as usize;
        if adm != pt {
            discrepancies += 1;
            if first.is_none() {
                first = Some(json!({ "basic_open": b.to_json(x), "admissible": adm, "has_point": pt }));
            }
        }
        if !good {
            bad_witnesses += 1;
        }
    }
    let verdict = if discrepancies == 0 && bad_witnesses == 0 { Verdict::Pass } else { Verdict::Fail };
    TheoremReport {
        verdict,
        n: x.n,
        instances: instances.len(),
        admissible,
        discrepancies,
        bad_witnesses,
        first_discrepancy: first,
    }
}

/// An element of `C^X` with the sup norm.
#[derive(Debug, Clone)]
pub struct AlgebraElement<S: Scalar> {
    pub values: Vec<ComplexPoint<S>>,
}

impl<S: Scalar> AlgebraElement<S> {
    pub fn new(values: Vec<ComplexPoint<S>>) -> Self {
        AlgebraElement { values }
    }

    /// From Gaussian rational coordinates `(re, im)`.
    pub fn gaussian(coords: &[(S, S)]) -> Self {
        Self::new(coords.iter().map(|(a, b)| ComplexPoint::constant(a.clone(), b.clone())).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![ComplexPoint::zero(); n])
    }

    pub fn unit(n: usize) -> Self {
        Self::new(vec![ComplexPoint::one(); n])
    }

    /// The idempotent `e_i`.
    pub fn idempotent(n: usize, i: usize) -> Self {
        Self::new((0..n).map(|k| if k == i { ComplexPoint::one() } else { ComplexPoint::zero() }).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn same_len(&self, other: &Self) -> Result<(), GelfandError> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(GelfandError::LengthMismatch(self.len(), other.len()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GelfandError> {
        self.same_len(other)?;
        Ok(Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GelfandError> {
        self.same_len(other)?;
        Ok(Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a.sub(b)).collect()))
    }

    /// Pointwise product; every component must be below `bound`.
    pub fn mul(&self, other: &Self, bound: u32) -> Result<Self, GelfandError> {
        self.same_len(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.mul(b, bound))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(values))
    }

    pub fn star(&self) -> Self {
        Self::new(self.values.iter().map(ComplexPoint::conj).collect())
    }

    pub fn scale(&self, re: &S, im: &S) -> Self {
        Self::new(self.values.iter().map(|z| z.scale(re, im)).collect())
    }

    /// A natural strictly above every component magnitude.
    pub fn bound_hint(&self) -> u32 {
        self.values.iter().map(ComplexPoint::bound_hint).max().unwrap_or(1)
    }

    /// Enclosure of the sup norm at readout precision `n`.
    pub fn norm_bounds(&self, n: u32) -> (S, S) {
        let mut lo = S::zero();
        let mut hi = S::zero();
        for z in &self.values {
            let (l, h) = z.modulus_bounds(n);
            lo = lo.max(l);
            hi = hi.max(h);
        }
        (lo, hi)
    }
}

/// `max_i |a_i|` as an upper real.
pub fn sup_norm<S: Scalar>(a: &AlgebraElement<S>) -> UpperReal<S> {
    UpperReal::max_all(a.values.iter().map(ComplexPoint::modulus))
}

/// Semi-decides `||a|| < q`: every coordinate lies in the open disc.
pub fn in_unit_ball<S: Scalar>(a: &AlgebraElement<S>, q: &S, effort: u32) -> Result<Answer, GelfandError> {
    if !q.is_positive() {
        return Err(schema("q", "radius must be positive"));
    }
    Ok(Answer::from_bool(a.values.iter().all(|z| z.modulus().below(q, effort).is_yes())))
}

fn bits_of(n: u32) -> u32 {
    32 - n.leading_zeros()
}

/// `|x - y| < 2^-k` for enclosures of `x` and `y`.
fn close<S: Scalar>(a: &(S, S), b: &(S, S), k: u32) -> bool {
    let gap = (a.1.clone() - b.0.clone()).max(b.1.clone() - a.0.clone());
    gap < pow2_neg(k)
}

/// Certified `|x - y| > 0` for enclosures.
fn apart<S: Scalar>(a: &(S, S), b: &(S, S)) -> bool {
    a.1 < b.0 || b.1 < a.0
}

#[derive(Debug, Clone, Serialize)]
pub struct CstarReport {
    pub verdict: Verdict,
    pub bits: u32,
    /// Enclosure of `||a* a||`.
    pub star_norm: (String, String),
    /// Enclosure of `||a||^2`.
    pub norm_squared: (String, String),
    pub submultiplicative: Vec<Verdict>,
}

/// Checks `||a* a|| = ||a||^2` to within `2^-k` by two-sided evaluation,
/// and `||ab|| <= ||a|| ||b||` against the given samples.
pub fn cstar_identity_check<S: Scalar>(
    a: &AlgebraElement<S>,
    k: u32,
    samples: &[AlgebraElement<S>],
) -> Result<CstarReport, GelfandError> {
    let bound = a.bound_hint();
    let extra = 2 * bits_of(bound) + 3;
    let n = k + extra;
    let aa = a.star().mul(a, bound)?;
    let star = aa.norm_bounds(n);
    let (lo, hi) = a.norm_bounds(n);
    let squared = (lo.clone() * lo, hi.clone() * hi);
    let mut verdict = if close(&star, &squared, k) {
        Verdict::Pass
    } else if apart(&star, &squared) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };

    let mut submultiplicative = Vec::with_capacity(samples.len());
    for b in samples {
        let bound = bound.max(b.bound_hint());
        let ab = a.mul(b, bound)?;
        let (ab_lo, ab_hi) = ab.norm_bounds(n);
        let (_, a_hi) = a.norm_bounds(n);
        let (_, b_hi) = b.norm_bounds(n);
        let rhs = a_hi * b_hi;
        let v = if ab_lo > rhs {
            Verdict::Fail
        } else if ab_hi < rhs.clone() + pow2_neg::<S>(k) {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        verdict = verdict.worst(v);
        submultiplicative.push(v);
    }
    Ok(CstarReport {
        verdict,
        bits: k,
        star_norm: (star.0.to_string(), star.1.to_string()),
        norm_squared: (squared.0.to_string(), squared.1.to_string()),
        submultiplicative,
    })
}

/// A candidate character, given by its values on the idempotents.
#[derive(Debug, Clone)]
pub struct Character<S: Scalar> {
    pub values: Vec<ComplexPoint<S>>,
}

impl<S: Scalar> Character<S> {
    pub fn new(values: Vec<ComplexPoint<S>>) -> Self {
        Character { values }
    }

    /// From exact values on the idempotents.
    pub fn gaussian(coords: &[(S, S)]) -> Self {
        Self::new(coords.iter().map(|(a, b)| ComplexPoint::constant(a.clone(), b.clone())).collect())
    }

    /// Evaluation at point `x`.
    pub fn projection(n: usize, x: usize) -> Self {
        Self::new(AlgebraElement::<S>::idempotent(n, x).values)
    }

    /// `chi(a) = sum_i chi(e_i) a_i`.
    pub fn apply(&self, a: &AlgebraElement<S>) -> Result<ComplexPoint<S>, GelfandError> {
        if a.len() != self.values.len() {
            return Err(GelfandError::LengthMismatch(self.values.len(), a.len()));
        }
        let mut acc = ComplexPoint::zero();
        for (c, z) in self.values.iter().zip(&a.values) {
            let bound = c.bound_hint().max(z.bound_hint());
            acc = acc.add(&c.mul(z, bound)?);
        }
        Ok(acc)
    }

    /// The `x` with `chi(e_x)` near 1, if the values are a 0/1 pattern
    /// with exactly one 1 at precision `k`.
    pub fn point(&self, k: u32) -> Option<usize> {
        let ones: Vec<usize> = (0..self.values.len())
            .filter(|&i| near(&self.values[i], &S::one(), k))
            .collect();
        let zeros = (0..self.values.len()).filter(|&i| near(&self.values[i], &S::zero(), k)).count();
        (ones.len() == 1 && zeros + 1 == self.values.len()).then(|| ones[0])
    }
}

fn near<S: Scalar>(z: &ComplexPoint<S>, target: &S, k: u32) -> bool {
    let d = z.sub(&ComplexPoint::constant(target.clone(), S::zero()));
    d.modulus_bounds(k + 2).1 < pow2_neg(k)
}

fn certified_far<S: Scalar>(z: &ComplexPoint<S>, target: &S, k: u32) -> bool {
    let d = z.sub(&ComplexPoint::constant(target.clone(), S::zero()));
    d.modulus_bounds(k + 2).0 >= pow2_neg(k)
}

/// The characters of `C^n`: the `n` coordinate projections.
pub fn spectrum_of_cn<S: Scalar>(n: usize) -> Vec<Character<S>> {
    (0..n).map(|x| Character::projection(n, x)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterCheck {
    pub check: String,
    pub result: Verdict,
    pub witness: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterReport {
    pub verdict: Verdict,
    pub bits: u32,
    pub checks: Vec<CharacterCheck>,
}

fn within<S: Scalar>(d: &ComplexPoint<S>, k: u32) -> Verdict {
    let (lo, hi) = d.modulus_bounds(k + 2);
    if hi < pow2_neg(k) {
        Verdict::Pass
    } else if lo > S::zero() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

fn render<S: Scalar>(z: &ComplexPoint<S>, k: u32) -> Value {
    let (re, im) = z.approx(k);
    json!([re.to_string(), im.to_string()])
}

fn element_json<S: Scalar>(a: &AlgebraElement<S>, k: u32) -> Value {
    Value::Array(a.values.iter().map(|z| render(z, k)).collect())
}

/// Verifies that `chi` is a unital multiplicative linear functional on the
/// idempotents and on `samples`, to precision `2^-k`.
///
/// Linearity is checked on sample pairs and Gaussian scalars. The
/// idempotent dichotomy step checks every `chi(e_i)` is near 0 or 1 and
/// that they sum to 1.
pub fn verify_character<S: Scalar>(
    chi: &Character<S>,
    samples: &[AlgebraElement<S>],
    k: u32,
) -> Result<CharacterReport, GelfandError> {
    let n = chi.values.len();
    let mut checks = Vec::new();
    let mut push = |check: &str, result: Verdict, witness: Value| {
        checks.push(CharacterCheck { check: check.to_string(), result, witness });
    };

    let unit = chi.apply(&AlgebraElement::unit(n))?;
    push("unit", within(&unit.sub(&ComplexPoint::one()), k), render(&unit, k));

    let mut sum = ComplexPoint::zero();
    for (i, c) in chi.values.iter().enumerate() {
        let result = if near(c, &S::zero(), k) || near(c, &S::one(), k) {
            Verdict::Pass
        } else if certified_far(c, &S::zero(), k) && certified_far(c, &S::one(), k) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        push("idempotent", result, json!({ "i": i, "value": render(c, k) }));
        sum = sum.add(c);
    }
    push("idempotent_sum", within(&sum.sub(&ComplexPoint::one()), k), render(&sum, k));

    let mut elements: Vec<AlgebraElement<S>> = (0..n).map(|i| AlgebraElement::idempotent(n, i)).collect();
    elements.extend(samples.iter().cloned());
    for (i, a) in elements.iter().enumerate() {
        for b in &elements[i..] {
            let bound = a.bound_hint().max(b.bound_hint());
            let ab = a.mul(b, bound)?;
            let lhs = chi.apply(&ab)?;
            let (ca, cb) = (chi.apply(a)?, chi.apply(b)?);
            let rhs = ca.mul(&cb, ca.bound_hint().max(cb.bound_hint()))?;
            let witness = json!({ "a": element_json(a, k), "b": element_json(b, k), "chi_ab": render(&lhs, k), "chi_a_chi_b": render(&rhs, k) });
            push("multiplicative", within(&lhs.sub(&rhs), k), witness);

            let sum = chi.apply(&a.add(b)?)?;
            push("additive", within(&sum.sub(&ca.add(&cb)), k), json!({ "a": element_json(a, k), "b": element_json(b, k) }));
        }
    }
    let (re, im) = (S::from_frac(1, 2), S::from_int(-3));
    for a in samples {
        let scaled = chi.apply(&a.scale(&re, &im))?;
        let expected = chi.apply(a)?.scale(&re, &im);
        push("homogeneous", within(&scaled.sub(&expected), k), json!({ "a": element_json(a, k) }));
    }

    let verdict = checks.iter().fold(Verdict::Pass, |v, c| v.worst(c.result));
    // keep reports short: all failures, or a summary line when clean
    let checks = if verdict == Verdict::Pass {
        vec![CharacterCheck { check: "all".into(), result: Verdict::Pass, witness: json!({ "count": checks.len() }) }]
    } else {
        checks.into_iter().filter(|c| c.result != Verdict::Pass).collect()
    };
    Ok(CharacterReport { verdict, bits: k, checks })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub verdict: Verdict,
    pub n: usize,
    /// 0/1 patterns on the idempotents that verified as characters.
    pub characters_found: usize,
    pub patterns_tried: usize,
    /// Characters matched to points, in pattern order.
    pub points: Vec<usize>,
    pub separated: bool,
    pub norm_preserving: Vec<Verdict>,
    pub failure: Option<Value>,
}

/// Round trip between `X = {0..n-1}` and the spectrum of `C^n`.
///
/// Every character sends each idempotent to 0 or 1 and their sum to 1, so
/// the candidates are the 0/1 patterns; each pattern is verified, the
/// survivors are matched to points, checked to be separated by
/// idempotents, and evaluation `C^n -> C(Spec)` is checked to preserve the
/// sup norm on `samples`.
pub fn duality_round_trip<S: Scalar>(
    n: usize,
    k: u32,
    samples: &[AlgebraElement<S>],
) -> Result<DualityReport, GelfandError> {
    DiscreteSpace::new(n)?;
    let patterns: Vec<u64> = (0..(1u64 << n)).collect();
    let verified: Vec<(u64, Verdict)> = patterns
        .par_iter()
        .map(|&mask| {
            let chi = Character::<S>::gaussian(
                &(0..n)
                    .map(|i| (S::from_int(((mask >> i) & 1) as i64), S::zero()))
                    .collect::<Vec<_>>(),
            );
            verify_character(&chi, samples, k).map(|r| (mask, r.verdict))
        })
        .collect::<Result<_, _>>()?;

    let mut failure = None;
    let survivors: Vec<u64> = verified.iter().filter(|(_, v)| *v == Verdict::Pass).map(|(m, _)| *m).collect();
    let inconclusive = verified.iter().any(|(_, v)| *v == Verdict::Inconclusive);
    for &(mask, v) in &verified {
        let expected = mask.count_ones() == 1;
        if (v == Verdict::Pass) != expected && v != Verdict::Inconclusive {
            failure.get_or_insert(json!({ "pattern": subset_points(mask), "verdict": v }));
        }
    }

    let characters: Vec<Character<S>> = survivors
        .iter()
        .map(|&m| Character::gaussian(&(0..n).map(|i| (S::from_int(((m >> i) & 1) as i64), S::zero())).collect::<Vec<_>>()))
        .collect();
    let points: Vec<usize> = characters.iter().filter_map(|c| c.point(k)).collect();
    let mut sorted = points.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let bijective = points.len() == characters.len() && sorted == (0..n).collect::<Vec<_>>();
    if !bijective {
        failure.get_or_insert(json!({ "points": points }));
    }

    // distinct characters differ on some idempotent
    let mut separated = true;
    for i in 0..characters.len() {
        for j in i + 1..characters.len() {
            let split = (0..n).any(|x| {
                let e = AlgebraElement::idempotent(n, x);
                let (a, b) = (characters[i].apply(&e), characters[j].apply(&e));
                matches!((a, b), (Ok(a), Ok(b)) if certified_far(&a.sub(&b), &S::zero(), 1))
            });
            separated &= split;
        }
    }
    if !separated {
        failure.get_or_insert(json!({ "separation": false }));
    }

    let mut norm_preserving = Vec::with_capacity(samples.len());
    for a in samples {
        let bits = k + 2 * bits_of(a.bound_hint()) + 3;
        let direct = a.norm_bounds(bits);
        let mut lo = S::zero();
        let mut hi = S::zero();
        for chi in &characters {
            let (l, h) = chi.apply(a)?.modulus_bounds(bits);
            lo = lo.max(l);
            hi = hi.max(h);
        }
        let v = if close(&direct, &(lo.clone(), hi.clone()), k) {
            Verdict::Pass
        } else if apart(&direct, &(lo, hi)) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        if v == Verdict::Fail {
            failure.get_or_insert(json!({ "norm": element_json(a, k) }));
        }
        norm_preserving.push(v);
    }

    let verdict = if failure.is_some() {
        Verdict::Fail
    } else if inconclusive || norm_preserving.iter().any(|v| *v != Verdict::Pass) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(DualityReport {
        verdict,
        n,
        characters_found: characters.len(),
        patterns_tried: patterns.len(),
        points,
        separated,
        norm_preserving,
        failure,
    })
}

/// Random element with Gaussian rational coordinates `a/4 + (b/4) i`,
/// `|a|, |b| <= 4 * max`.
pub fn random_element<S: Scalar>(rng: &mut impl Rng, n: usize, max: i64) -> AlgebraElement<S> {
    let coords: Vec<(S, S)> = (0..n)
        .map(|_| {
            let re = rng.gen_range(-4 * max..=4 * max);
            let im = rng.gen_range(-4 * max..=4 * max);
            (S::from_frac(re, 4), S::from_frac(im, 4))
        })
        .collect();
    AlgebraElement::gaussian(&coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    fn two() -> DiscreteSpace {
        DiscreteSpace::new(2).unwrap()
    }

    fn open(lowers: &[(&[usize], i64)], uppers: &[(&[usize], i64)]) -> BasicOpenXR<Rational> {
        let side = |cs: &[(&[usize], i64)]| cs.iter().map(|(s, q)| (subset_of(s), r(*q, 1))).collect();
        BasicOpenXR::new(side(lowers), side(uppers))
    }

    #[test]
    fn admissibility_examples() {
        assert!(!is_admissible(&open(&[(&[0], 0)], &[(&[0], 1)]), &two()).unwrap());
        assert!(is_admissible(&open(&[(&[0], 0)], &[(&[1], 1)]), &two()).unwrap());
        assert!(is_admissible(&open(&[(&[0], 5)], &[(&[0], 1)]), &two()).unwrap());
        assert!(matches!(
            is_admissible(&open(&[(&[3], 0)], &[]), &two()),
            Err(GelfandError::OutOfRange { index: 3, n: 2 })
        ));
    }

    #[test]
    fn point_examples() {
        assert_eq!(has_point(&open(&[(&[0], 0)], &[(&[1], 1)]), &two()).unwrap(), Some(vec![r(-1, 1), r(2, 1)]));
        assert_eq!(has_point(&open(&[(&[0], 0)], &[(&[0], 1)]), &two()).unwrap(), None);
        assert_eq!(has_point(&open(&[], &[]), &two()).unwrap(), Some(vec![r(0, 1), r(0, 1)]));
        assert_eq!(has_point(&open(&[(&[0, 1], 3)], &[(&[0], 1)]), &two()).unwrap(), Some(vec![r(2, 1), r(2, 1)]));
    }

    #[test]
    fn small_exhaustive_theorem_checks() {
        let grid: Vec<Rational> = [-2, -1, 0, 1, 2, 3, 4].iter().map(|&k| r(k, 2)).collect();
        let rep = admissibility_theorem_check(&two(), &Enumeration::Exhaustive { grid: grid.clone(), per_side: 2 });
        assert_eq!((rep.verdict, rep.discrepancies), (Verdict::Pass, 0));
        assert!(rep.admissible > 0 && rep.admissible < rep.instances);
        let one = DiscreteSpace::new(1).unwrap();
        let rep = admissibility_theorem_check(&one, &Enumeration::Exhaustive { grid, per_side: 2 });
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn json_round_trip() {
        let b = open(&[(&[0], 0)], &[(&[1], 1)]);
        let v = b.to_json(&two());
        let (x, back) = BasicOpenXR::<Rational>::from_json(&v).unwrap();
        assert_eq!((x, back), (two(), b));
        let bad = json!({ "n": 2, "lowers": [{ "set": [5], "bound": "0" }] });
        match BasicOpenXR::<Rational>::from_json(&bad) {
            Err(GelfandError::Schema { path, .. }) => assert_eq!(path, "$.lowers[0].set[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norm_examples() {
        let a = AlgebraElement::gaussian(&[(r(3, 1), r(4, 1)), (r(0, 1), r(0, 1))]);
        assert_eq!(sup_norm(&a).less_than(&r(501, 100), 64).unwrap(), Answer::Yes);
        let z = AlgebraElement::<Rational>::zero(3);
        for q in [r(1, 1000), r(1, 1)] {
            assert_eq!(in_unit_ball(&z, &q, 64).unwrap(), Answer::Yes);
        }
        let ones = AlgebraElement::gaussian(&[(r(1, 1), r(0, 1)), (r(1, 1), r(0, 1))]);
        for e in [0, 64, 300] {
            assert_eq!(in_unit_ball(&ones, &r(1, 1), e).unwrap(), Answer::NotYet);
        }
    }

    #[test]
    fn cstar_examples() {
        for coords in [
            vec![(r(2, 1), r(0, 1)), (r(0, 1), r(1, 1))],
            vec![(r(0, 1), r(0, 1))],
            vec![(r(1, 1), r(1, 1)), (r(0, 1), r(0, 1))],
        ] {
            let a = AlgebraElement::gaussian(&coords);
            let sample = AlgebraElement::gaussian(&vec![(r(1, 2), r(-1, 1)); coords.len()]);
            let rep = cstar_identity_check(&a, 20, &[sample]).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        }
    }

    #[test]
    fn spectrum_examples() {
        let samples = vec![AlgebraElement::gaussian(&[(r(1, 2), r(1, 1)), (r(-1, 1), r(0, 1)), (r(3, 4), r(-1, 4))])];
        let chars = spectrum_of_cn::<Rational>(3);
        assert_eq!(chars.len(), 3);
        for c in &chars {
            assert_eq!(verify_character(c, &samples, 20).unwrap().verdict, Verdict::Pass);
        }
        let one = spectrum_of_cn::<Rational>(1);
        assert_eq!(one.len(), 1);
        let z = AlgebraElement::gaussian(&[(r(5, 3), r(-2, 1))]);
        let image = one[0].apply(&z).unwrap();
        assert_eq!(image.approx(20), (r(5, 3), r(-2, 1)));

        let bogus = Character::<Rational>::gaussian(&[(r(1, 1), r(0, 1)), (r(1, 1), r(0, 1))]);
        let rep = verify_character(&bogus, &[], 20).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let mult = rep.checks.iter().find(|c| c.check == "multiplicative" && c.result == Verdict::Fail).unwrap();
        assert_eq!(mult.witness["chi_ab"], json!(["0", "0"]));
        assert_eq!(mult.witness["chi_a_chi_b"], json!(["1", "0"]));
    }

    #[test]
    fn duality_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            let samples: Vec<_> = (0..2).map(|_| random_element::<Rational>(&mut rng, n, 2)).collect();
            let rep = duality_round_trip(n, 20, &samples).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
            assert_eq!(rep.characters_found, n);
        }
    }
}
