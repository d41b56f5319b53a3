//! Pre-metric carriers: decidable sets with interval-valued distances from
//! which completions are built.

use std::fmt::Debug;
use std::marker::PhantomData;
use std::sync::Arc;

use thiserror::Error;

use crate::numeric::{pow2, Extended, Scalar};

/// Enclosure `[lo, hi]` of a true distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistInterval<S> {
    pub lo: S,
    pub hi: Extended<S>,
}

impl<S: Scalar> DistInterval<S> {
    pub fn exact(d: S) -> Self {
        DistInterval { lo: d.clone(), hi: Extended::Finite(d) }
    }

    pub fn is_exact(&self) -> bool {
        self.hi == Extended::Finite(self.lo.clone())
    }

    /// Componentwise maximum, the distance interval of a max-metric product.
    pub fn max(self, other: Self) -> Self {
        DistInterval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }
}

/// Structural descriptor of a carrier. Two opens may only be combined
/// when their carriers have equal descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CarrierId<S> {
    Line,
    Finite { n: usize, d: Arc<Vec<Vec<S>>> },
    Gaussian,
    Product(Box<CarrierId<S>>, Box<CarrierId<S>>),
}

impl<S: Scalar> CarrierId<S> {
    /// `"line"`, `"gaussian"`, `{"n": .., "d": [[..]]}` or a pair of ids.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CarrierId::Line => serde_json::json!("line"),
            CarrierId::Gaussian => serde_json::json!("gaussian"),
            CarrierId::Finite { n, d } => {
                let rows: Vec<Vec<String>> = d
                    .iter()
                    .map(|row| row.iter().map(|x| x.to_string()).collect())
                    .collect();
                serde_json::json!({ "n": n, "d": rows })
            }
            CarrierId::Product(l, r) => serde_json::json!([l.to_json(), r.to_json()]),
        }
    }
}

/// A pre-metric set with decidable equality.
///
/// `dist` returns an enclosure that shrinks as `effort` grows; symmetric,
/// containing `0` on the diagonal, and the true values satisfy the
/// triangle inequality.
pub trait MetricCarrier: Clone + Send + Sync + 'static {
    type Scalar: Scalar;
    type Point: Clone + PartialEq + Debug + Send + Sync + 'static;

    fn dist(&self, a: &Self::Point, b: &Self::Point, effort: u32) -> DistInterval<Self::Scalar>;

    fn id(&self) -> CarrierId<Self::Scalar>;

    fn contains(&self, _p: &Self::Point) -> bool {
        true
    }

    /// Candidate points "between" `a` and `b`, both endpoints included.
    /// Used when searching for witnesses inside intersections of balls;
    /// finer with effort.
    fn between(&self, a: &Self::Point, b: &Self::Point, effort: u32) -> Vec<Self::Point>;

    /// JSON rendering of a point, used in reports and CLI output.
    fn render(&self, p: &Self::Point) -> serde_json::Value;

    /// Upper end of the distance enclosure.
    fn dist_hi(&self, a: &Self::Point, b: &Self::Point, effort: u32) -> Extended<Self::Scalar> {
        self.dist(a, b, effort).hi
    }

    fn dist_lo(&self, a: &Self::Point, b: &Self::Point, effort: u32) -> Self::Scalar {
        self.dist(a, b, effort).lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("distance table must be {n}x{n}")]
    Shape { n: usize },
    #[error("a finite space needs at least one point")]
    Empty,
    #[error("d({0},{0}) must be 0")]
    Diagonal(usize),
    #[error("distance d({0},{1}) is negative")]
    Negative(usize, usize),
    #[error("d({0},{1}) differs from d({1},{0})")]
    Asymmetric(usize, usize),
    #[error("triangle inequality fails on ({0},{1},{2}): d({0},{2}) > d({0},{1}) + d({1},{2})")]
    Triangle(usize, usize, usize),
}

fn dyadic_fractions<S: Scalar>(effort: u32) -> Vec<S> {
    let m = effort.min(3) + 1;
    let steps = 1i64 << m;
    (0..=steps).map(|k| S::from_int(k) / pow2::<S>(m)).collect()
}

/// The rational line with `d(a, b) = |a - b|`.
#[derive(Debug)]
pub struct RationalLine<S>(PhantomData<fn() -> S>);

impl<S> RationalLine<S> {
    pub fn new() -> Self {
        RationalLine(PhantomData)
    }
}

impl<S> Default for RationalLine<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S> Clone for RationalLine<S> {
    fn clone(&self) -> Self {
        Self::new()
    }
}

impl<S: Scalar> MetricCarrier for RationalLine<S> {
    type Scalar = S;
    type Point = S;

    fn dist(&self, a: &S, b: &S, _effort: u32) -> DistInterval<S> {
        DistInterval::exact((a.clone() - b.clone()).abs())
    }

    fn id(&self) -> CarrierId<S> {
        CarrierId::Line
    }

    fn render(&self, p: &S) -> serde_json::Value {
        serde_json::Value::String(p.to_string())
    }

    fn between(&self, a: &S, b: &S, effort: u32) -> Vec<S> {
        let delta = b.clone() - a.clone();
        dyadic_fractions::<S>(effort)
            .into_iter()
            .map(|t| a.clone() + t * delta.clone())
            .collect()
    }
}

/// Points `0..n` with a validated distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<S> {
    table: Arc<Vec<Vec<S>>>,
}

impl<S: Scalar> FiniteSpace<S> {
    /// Validates the table: square, zero diagonal, non-negative, symmetric,
    /// and the triangle inequality on every triple.
    pub fn new(table: Vec<Vec<S>>) -> Result<Self, MetricError> {
        let n = table.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if table.iter().any(|row| row.len() != n) {
            return Err(MetricError::Shape { n });
        }
        for x in 0..n {
            if !table[x][x].is_zero() {
                return Err(MetricError::Diagonal(x));
            }
            for y in 0..n {
                if table[x][y].is_negative() {
                    return Err(MetricError::Negative(x, y));
                }
                if table[x][y] != table[y][x] {
                    return Err(MetricError::Asymmetric(x, y));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if table[x][z] > table[x][y].clone() + table[y][z].clone() {
                        return Err(MetricError::Triangle(x, y, z));
                    }
                }
            }
        }
        Ok(FiniteSpace { table: Arc::new(table) })
    }

    /// Discrete metric on `n` points: every distinct pair at distance 1.
    pub fn discrete(n: usize) -> Self {
        let table = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::zero() } else { S::one() }).collect())
            .collect();
        Self::new(table).expect("discrete metric is valid")
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn d(&self, a: usize, b: usize) -> &S {
        &self.table[a][b]
    }

    pub fn table(&self) -> &[Vec<S>] {
        &self.table
    }

    pub fn points(&self) -> impl Iterator<Item = usize> {
        0..self.table.len()
    }
}

impl<S: Scalar> MetricCarrier for FiniteSpace<S> {
    type Scalar = S;
    type Point = usize;

    fn dist(&self, a: &usize, b: &usize, _effort: u32) -> DistInterval<S> {
        DistInterval::exact(self.table[*a][*b].clone())
    }

    fn id(&self) -> CarrierId<S> {
        CarrierId::Finite { n: self.table.len(), d: self.table.clone() }
    }

    fn contains(&self, p: &usize) -> bool {
        *p < self.table.len()
    }

    fn render(&self, p: &usize) -> serde_json::Value {
        serde_json::Value::from(*p)
    }

    fn between(&self, _a: &usize, _b: &usize, _effort: u32) -> Vec<usize> {
        (0..self.table.len()).collect()
    }
}

/// Gaussian rationals `Q[i]` as pairs `(re, im)` with the max metric.
#[derive(Debug)]
pub struct GaussianPlane<S>(PhantomData<fn() -> S>);

impl<S> GaussianPlane<S> {
    pub fn new() -> Self {
        GaussianPlane(PhantomData)
    }
}

impl<S> Default for GaussianPlane<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S> Clone for GaussianPlane<S> {
    fn clone(&self) -> Self {
        Self::new()
    }
}

impl<S: Scalar> MetricCarrier for GaussianPlane<S> {
    type Scalar = S;
    type Point = (S, S);

    fn dist(&self, a: &(S, S), b: &(S, S), _effort: u32) -> DistInterval<S> {
        let re = (a.0.clone() - b.0.clone()).abs();
        let im = (a.1.clone() - b.1.clone()).abs();
        DistInterval::exact(re.max(im))
    }

    fn id(&self) -> CarrierId<S> {
        CarrierId::Gaussian
    }

    fn render(&self, p: &(S, S)) -> serde_json::Value {
        serde_json::json!([p.0.to_string(), p.1.to_string()])
    }

    fn between(&self, a: &(S, S), b: &(S, S), effort: u32) -> Vec<(S, S)> {
        let dre = b.0.clone() - a.0.clone();
        let dim = b.1.clone() - a.1.clone();
        dyadic_fractions::<S>(effort)
            .into_iter()
            .map(|t| (a.0.clone() + t.clone() * dre.clone(), a.1.clone() + t * dim.clone()))
            .collect()
    }
}

/// Binary product with `d((l, m), (l', m')) = max(d(l, l'), d(m, m'))`.
#[derive(Debug, Clone)]
pub struct Product<L, R> {
    pub left: L,
    pub right: R,
}

impl<L, R> Product<L, R> {
    pub fn new(left: L, right: R) -> Self {
        Product { left, right }
    }
}

impl<L, R> MetricCarrier for Product<L, R>
where
    L: MetricCarrier,
    R: MetricCarrier<Scalar = L::Scalar>,
{
    type Scalar = L::Scalar;
    type Point = (L::Point, R::Point);

    fn dist(&self, a: &Self::Point, b: &Self::Point, effort: u32) -> DistInterval<L::Scalar> {
        self.left
            .dist(&a.0, &b.0, effort)
            .max(self.right.dist(&a.1, &b.1, effort))
    }

    fn id(&self) -> CarrierId<L::Scalar> {
        CarrierId::Product(Box::new(self.left.id()), Box::new(self.right.id()))
    }

    fn contains(&self, p: &Self::Point) -> bool {
        self.left.contains(&p.0) && self.right.contains(&p.1)
    }

    fn render(&self, p: &Self::Point) -> serde_json::Value {
        serde_json::json!([self.left.render(&p.0), self.right.render(&p.1)])
    }

    fn between(&self, a: &Self::Point, b: &Self::Point, effort: u32) -> Vec<Self::Point> {
        let lefts = self.left.between(&a.0, &b.0, effort);
        let rights = self.right.between(&a.1, &b.1, effort);
        let mut out = Vec::with_capacity(lefts.len() * rights.len());
        for l in &lefts {
            for r in &rights {
                out.push((l.clone(), r.clone()));
            }
        }
        out
    }
}
