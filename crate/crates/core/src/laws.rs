//! Randomized property catalog checked against brute-force oracles.
//!
//! Every law draws from its own ChaCha stream derived from the suite seed,
//! fans the work out with rayon and collects results in input order, so a
//! run is a pure function of its [`LawConfig`].

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ball::{BallOpen, FormalBall};
use crate::completion::{CompletionPoint, FilterSeed};
use crate::expr::{certified_decimal, RealExpr};
use crate::function_locale::{check_axiom, round_trip, LineGrid, MmInstance};
use crate::gelfand::{
    admissibility_theorem_check, cstar_identity_check, duality_round_trip, random_element, spectrum_of_cn, sup_norm,
    verify_character, DiscreteSpace, Enumeration,
};
use crate::maps::{classify_map, extend_by_density, MapClass, MapRep, Modulus};
use crate::metric::{FiniteSpace, MetricCarrier, RationalLine};
use crate::numeric::{pow2_neg, round_down_dyadic, sqrt_bounds, Extended, Scalar};
use crate::report::Verdict;

/// Sizes of every sampled family in the suite.
#[derive(Debug, Clone, Serialize)]
pub struct LawConfig {
    pub seed: u64,
    pub spaces: usize,
    pub space_trials: usize,
    pub max_points: usize,
    pub triples: usize,
    pub seeds: usize,
    pub expressions: usize,
    pub expression_depth: u32,
    pub precision: u32,
    pub extensions: usize,
    pub extension_probes: usize,
    pub locale_maps: usize,
    pub locale_instances: usize,
    pub locale_effort: u32,
    pub round_trip_effort: u32,
    pub round_trip_probes: usize,
    pub theorem_random: usize,
    pub cstar_samples: usize,
    pub spectrum_max_n: usize,
    pub duality_max_n: usize,
}

impl LawConfig {
    /// The full-size catalog.
    pub fn full(seed: u64) -> Self {
        LawConfig {
            seed,
            spaces: 200,
            space_trials: 10,
            max_points: 8,
            triples: 500,
            seeds: 100,
            expressions: 1000,
            expression_depth: 6,
            precision: 30,
            extensions: 50,
            extension_probes: 20,
            locale_maps: 10,
            locale_instances: 500,
            locale_effort: 32,
            round_trip_effort: 256,
            round_trip_probes: 40,
            theorem_random: 10_000,
            cstar_samples: 100,
            spectrum_max_n: 6,
            duality_max_n: 4,
        }
    }

    /// A small configuration for smoke tests.
    pub fn quick(seed: u64) -> Self {
        LawConfig {
            spaces: 12,
            space_trials: 4,
            triples: 30,
            seeds: 8,
            expressions: 40,
            extensions: 4,
            extension_probes: 4,
            locale_maps: 2,
            locale_instances: 30,
            round_trip_probes: 12,
            theorem_random: 300,
            cstar_samples: 6,
            spectrum_max_n: 3,
            duality_max_n: 2,
            ..Self::full(seed)
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Count {
    pub cases: usize,
    pub failures: usize,
}

const MAX_EXAMPLES: usize = 5;

/// Per-item pass/fail counts with the first few counterexamples.
#[derive(Debug, Default)]
struct Tally {
    items: BTreeMap<&'static str, Count>,
    examples: Vec<Value>,
}

impl Tally {
    fn check(&mut self, item: &'static str, ok: bool, witness: impl FnOnce() -> Value) {
        let c = self.items.entry(item).or_default();
        c.cases += 1;
        if !ok {
            c.failures += 1;
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(json!({ "item": item, "witness": witness() }));
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (k, c) in other.items {
            let e = self.items.entry(k).or_default();
            e.cases += c.cases;
            e.failures += c.failures;
        }
        for ex in other.examples {
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(ex);
            }
        }
        self
    }

    fn outcome(self, law: &str, extra: Value) -> LawOutcome {
        let cases = self.items.values().map(|c| c.cases).sum();
        let failures = self.items.values().map(|c| c.failures).sum();
        LawOutcome {
            law: law.to_string(),
            verdict: if failures == 0 { Verdict::Pass } else { Verdict::Fail },
            cases,
            failures,
            items: self.items.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            examples: self.examples,
            extra,
        }
    }
}

fn merge_all(parts: Vec<Tally>) -> Tally {
    parts.into_iter().fold(Tally::default(), Tally::merge)
}

/// Result of one law family.
#[derive(Debug, Clone, Serialize)]
pub struct LawOutcome {
    pub law: String,
    pub verdict: Verdict,
    pub cases: usize,
    pub failures: usize,
    pub items: BTreeMap<String, Count>,
    pub examples: Vec<Value>,
    pub extra: Value,
}

fn seeds(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.next_u64()).collect()
}

// ---------------------------------------------------------------------
// ball calculus on finite spaces

/// Random finite metric space: shortest paths over random edge weights
/// `k/4 <= max_d`.
pub fn random_finite_space<S: Scalar>(rng: &mut impl Rng, max_points: usize, max_d: i64) -> FiniteSpace<S> {
    let n = rng.gen_range(1..=max_points);
    let mut d = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = S::from_frac(rng.gen_range(1..=4 * max_d), 4);
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].clone() + d[k][j].clone();
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteSpace::new(d).expect("shortest-path distances form a metric")
}

/// Brute-force semantics of opens of a finite space as point bitmasks.
struct FiniteOracle<'a, S: Scalar> {
    space: &'a FiniteSpace<S>,
    subset_diam: Vec<S>,
}

impl<'a, S: Scalar> FiniteOracle<'a, S> {
    fn new(space: &'a FiniteSpace<S>) -> Self {
        let n = space.len();
        let mut subset_diam = vec![S::zero(); 1 << n];
        for m in 1usize..(1 << n) {
            let top = usize::BITS - 1 - m.leading_zeros();
            let rest = m & !(1 << top);
            let mut d = subset_diam[rest].clone();
            for j in 0..n {
                if rest & (1 << j) != 0 {
                    d = d.max(space.d(top as usize, j).clone());
                }
            }
            subset_diam[m] = d;
        }
        FiniteOracle { space, subset_diam }
    }

    fn full(&self) -> u64 {
        (1u64 << self.space.len()) - 1
    }

    fn ball(&self, c: usize, r: &S) -> u64 {
        (0..self.space.len()).filter(|&x| self.space.d(x, c) < r).fold(0, |m, x| m | (1 << x))
    }

    fn denote(&self, u: &BallOpen<FiniteSpace<S>>) -> u64 {
        u.balls().iter().fold(0, |m, b| m | self.ball(b.center, &b.radius))
    }

    fn diam(&self, m: u64) -> S {
        self.subset_diam[m as usize].clone()
    }

    /// `B_q(m) = {y : d(x, y) < q for some x in m}`.
    fn nbhd(&self, m: u64, q: &S) -> u64 {
        (0..self.space.len()).filter(|&x| m & (1 << x) != 0).fold(0, |acc, x| acc | self.ball(x, q))
    }

    /// `m ◁_q t` from the product formula: every pair `(x, y)` with
    /// `x` in `m` and `d(x, y) < q` has `y` in `t`.
    fn way_inside(&self, m: u64, q: &S, t: u64) -> bool {
        let n = self.space.len();
        (0..n).all(|x| m & (1 << x) == 0 || (0..n).all(|y| self.space.d(x, y) >= q || t & (1 << y) != 0))
    }
}

fn random_radius<S: Scalar>(rng: &mut impl Rng, space: &FiniteSpace<S>, c: usize) -> S {
    // half the time land exactly on a distance, to exercise boundaries
    if rng.gen_bool(0.5) {
        let y = rng.gen_range(0..space.len());
        let d = space.d(c, y).clone();
        if d.is_positive() {
            return d;
        }
    }
    S::from_frac(rng.gen_range(1..=40), 4)
}

fn random_finite_open<S: Scalar>(rng: &mut impl Rng, space: &FiniteSpace<S>, max_balls: usize) -> BallOpen<FiniteSpace<S>> {
    let k = rng.gen_range(0..=max_balls);
    let balls = (0..k)
        .map(|_| {
            let c = rng.gen_range(0..space.len());
            FormalBall { center: c, radius: random_radius(rng, space, c) }
        })
        .collect();
    BallOpen::new(space.clone(), balls).expect("radii are positive")
}

fn random_margin<S: Scalar>(rng: &mut impl Rng) -> S {
    S::from_frac(rng.gen_range(1..=24), 4)
}

fn open_json<S: Scalar>(u: &BallOpen<FiniteSpace<S>>) -> Value {
    let balls: Vec<Value> = u.balls().iter().map(|b| json!([b.center, b.radius.to_string()])).collect();
    json!(balls)
}

fn finite_trial<S: Scalar>(rng: &mut ChaCha8Rng, space: &FiniteSpace<S>, o: &FiniteOracle<S>, t: &mut Tally) {
    const E: u32 = 4;
    let u = random_finite_open(rng, space, 3);
    let v = random_finite_open(rng, space, 3);
    let q: S = random_margin(rng);
    let q2: S = random_margin(rng);
    let (su, sv) = (o.denote(&u), o.denote(&v));
    let ctx = || json!({ "n": space.len(), "u": open_json(&u), "v": open_json(&v), "q": q.to_string() });

    // 1: B_q u <= v iff u ◁_q v, and the representation respects it
    let nb = o.nbhd(su, &q);
    let adj = nb & !sv == 0;
    t.check("adjunction_oracle", adj == o.way_inside(su, &q, sv), ctx);
    let yes = u.way_inside(&q, &v, E).expect("same carrier").is_yes();
    t.check("adjunction_way_inside_sound", !yes || adj, ctx);
    if yes {
        let eps = q.clone() / S::from_int(4);
        let grown = u.neighborhood(&(q.clone() - eps.clone())).expect("positive margin");
        t.check("adjunction_transfer", grown.way_inside(&eps, &v, E).expect("same carrier").is_yes(), ctx);
    }
    let rep_nb = o.denote(&u.neighborhood(&q).expect("positive margin"));
    t.check("neighborhood_covers", nb & !rep_nb == 0, ctx);

    // 2: monotone diameter, denotationally and for ball-list inclusion
    if su & !sv == 0 {
        t.check("diameter_monotone", o.diam(su) <= o.diam(sv), ctx);
    }
    let wider = u.union(&v).expect("same carrier");
    let (du, dw) = (u.diameter_upper(), wider.diameter_upper());
    t.check("diameter_monotone_representation", du.bound(E) <= dw.bound(E), ctx);
    for probe in [q.clone(), q.clone() + q2.clone()] {
        if dw.below(&probe, E).is_yes() {
            t.check("diameter_monotone_queries", du.below(&probe, E).is_yes(), ctx);
        }
    }
    t.check("diameter_sound", su == 0 || du.bound(E) > Extended::Finite(o.diam(su)), ctx);

    // 5: diameter of a union is the sup over pairs
    if !u.is_empty() {
        let parts: Vec<u64> = u.balls().iter().map(|b| o.ball(b.center, &b.radius)).collect();
        let mut pair_max = S::zero();
        let mut rep_max = Extended::Finite(S::zero());
        for (i, bi) in u.balls().iter().enumerate() {
            for (j, bj) in u.balls().iter().enumerate() {
                pair_max = pair_max.max(o.diam(parts[i] | parts[j]));
                let two = BallOpen::new(space.clone(), vec![bi.clone(), bj.clone()]).expect("valid balls");
                rep_max = rep_max.max(two.diameter_upper().bound(E));
            }
        }
        t.check("union_diameter", o.diam(su) == pair_max, ctx);
        t.check("union_diameter_representation", du.bound(E) == rep_max, ctx);
    }

    // 6: overlapping opens
    if su & sv != 0 {
        t.check("overlap_diameter", o.diam(su | sv) <= o.diam(su) + o.diam(sv), ctx);
    }

    // 7: chains of overlapping balls
    let len = rng.gen_range(2..=5);
    let mut chain = Vec::with_capacity(len);
    let mut c = rng.gen_range(0..space.len());
    for _ in 0..len {
        let r = random_radius(rng, space, c);
        let m = o.ball(c, &r);
        chain.push(m);
        let inside: Vec<usize> = (0..space.len()).filter(|&x| m & (1 << x) != 0).collect();
        c = inside[rng.gen_range(0..inside.len())];
    }
    let total = chain.iter().fold(0, |a, m| a | m);
    let sum = chain.iter().fold(S::zero(), |a, m| a + o.diam(*m));
    t.check("chain_diameter", o.diam(total) <= sum, || json!({ "n": space.len(), "chain": chain }));

    // 10: B_q as the union of small opens meeting the set
    let small = (1..=o.full()).filter(|m| m & su != 0 && o.diam(*m) < q).fold(0, |a, m| a | m);
    t.check("neighborhood_as_union", nb == small, ctx);

    // 11: iterated neighborhoods
    let twice = o.nbhd(nb, &q2);
    t.check("neighborhood_triangle", twice & !o.nbhd(su, &(q.clone() + q2.clone())) == 0, ctx);
    let stepwise = u.neighborhood(&q).and_then(|w| w.neighborhood(&q2)).expect("positive margins");
    let direct = u.neighborhood(&(q.clone() + q2.clone())).expect("positive margin");
    t.check("neighborhood_triangle_representation", stepwise.to_json() == direct.to_json(), ctx);

    // 12: diameter of a neighborhood
    let two_q = q.clone() + q.clone();
    t.check("neighborhood_diameter", o.diam(nb) <= two_q.clone() + o.diam(su), ctx);
    let grown = u.neighborhood(&q).expect("positive margin").diameter_upper().bound(E);
    t.check("neighborhood_diameter_representation", grown <= du.bound(E) + Extended::Finite(two_q), ctx);
}

/// Pre-metric laws of the ball calculus on random finite spaces.
pub fn ball_calculus_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    let mut rng = cfg.rng(1);
    let parts: Vec<Tally> = seeds(&mut rng, cfg.spaces)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let space = random_finite_space::<S>(&mut rng, cfg.max_points, 16);
            let oracle = FiniteOracle::new(&space);
            let mut t = Tally::default();
            for _ in 0..cfg.space_trials {
                finite_trial(&mut rng, &space, &oracle, &mut t);
            }
            t
        })
        .collect();
    merge_all(parts).outcome("ball_calculus", json!({ "spaces": cfg.spaces, "trials_per_space": cfg.space_trials }))
}

// ---------------------------------------------------------------------
// completion distance

fn random_rational<S: Scalar>(rng: &mut impl Rng, num: i64, den: i64) -> S {
    S::from_frac(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// A random point of the completed line: a constant, the dyadic
/// truncations of a rational, or a wobbling sequence around one.
pub fn random_line_point<S: Scalar>(rng: &mut impl Rng) -> CompletionPoint<RationalLine<S>> {
    let line = RationalLine::new();
    let x: S = random_rational(rng, 24, 9);
    match rng.gen_range(0..4) {
        0 => CompletionPoint::of_carrier(line, x),
        1 => CompletionPoint::from_stages(line, move |n| round_down_dyadic(&x, n + 1)),
        2 => {
            let t = S::from_frac(rng.gen_range(-4..=4), 4);
            CompletionPoint::from_stages(line, move |n| x.clone() + t.clone() * pow2_neg::<S>(n + 1))
        }
        _ => {
            // sqrt of a positive rational, from below
            let a = x.abs() + S::one();
            CompletionPoint::from_stages(line, move |n| sqrt_bounds(&a, n + 1).0)
        }
    }
}

fn random_finite_point<S: Scalar>(rng: &mut impl Rng, space: &FiniteSpace<S>) -> CompletionPoint<FiniteSpace<S>> {
    let x = rng.gen_range(0..space.len());
    let near: Vec<usize> = space.points().filter(|&y| *space.d(x, y) <= S::one()).collect();
    let first = near[rng.gen_range(0..near.len())];
    CompletionPoint::from_stages(space.clone(), move |n| if n == 0 { first } else { x })
}

fn metric_checks<C: MetricCarrier>(pts: [&CompletionPoint<C>; 3], rng: &mut impl Rng, t: &mut Tally) {
    let dist = |a: &CompletionPoint<C>, b: &CompletionPoint<C>| a.distance(b).expect("same carrier");
    let [p, q, r] = pts;
    let (pq, qp, qr, pr) = (dist(p, q), dist(q, p), dist(q, r), dist(p, r));
    let stages = |c: &CompletionPoint<C>| json!(c.prefix(3).iter().map(|x| c.carrier().render(x)).collect::<Vec<_>>());
    let ctx = || json!({ "p": stages(p), "q": stages(q), "r": stages(r) });
    for e in [1u32, 2, 4, 8, 16] {
        let tick = pow2_neg::<C::Scalar>(e);
        let mut probes = vec![C::Scalar::from_frac(rng.gen_range(1..=64), 4)];
        for b in [pq.bound(e), qp.bound(e)] {
            if let Some(b) = b.finite() {
                probes.push(b.clone());
                probes.push(b.clone() + tick.clone());
            }
        }
        for x in &probes {
            t.check("symmetry", pq.below(x, e) == qp.below(x, e), ctx);
        }
        if let (Some(a), Some(b)) = (pq.bound(e).finite().cloned(), qr.bound(e).finite().cloned()) {
            let (a, b) = (a + tick.clone(), b + tick.clone());
            let premise = pq.below(&a, e).is_yes() && qr.below(&b, e).is_yes();
            t.check("triangle_premise", premise, ctx);
            t.check("triangle", pr.below(&(a + b), 4 * e).is_yes(), ctx);
        }
    }
}

/// Symmetry and the triangle inequality of the completion distance at the
/// query level, on the line and on finite spaces.
pub fn completion_metric_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    let mut rng = cfg.rng(2);
    let parts: Vec<Tally> = seeds(&mut rng, cfg.triples)
        .into_par_iter()
        .enumerate()
        .map(|(i, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = Tally::default();
            if i % 2 == 0 {
                let pts = [random_line_point::<S>(&mut rng), random_line_point(&mut rng), random_line_point(&mut rng)];
                metric_checks([&pts[0], &pts[1], &pts[2]], &mut rng, &mut t);
            } else {
                let space = random_finite_space::<S>(&mut rng, 6, 4);
                let pts = [0, 1, 2].map(|_| random_finite_point(&mut rng, &space));
                metric_checks([&pts[0], &pts[1], &pts[2]], &mut rng, &mut t);
            }
            t
        })
        .collect();
    merge_all(parts).outcome("completion_metric", json!({ "triples": cfg.triples }))
}

// ---------------------------------------------------------------------
// regularization

fn line_ball<S: Scalar>(c: S, r: S) -> BallOpen<RationalLine<S>> {
    BallOpen::single(RationalLine::new(), c, r).expect("positive radius")
}

fn random_seed<S: Scalar>(rng: &mut impl Rng) -> (FilterSeed<RationalLine<S>>, S) {
    if rng.gen_bool(0.5) {
        let p = random_line_point::<S>(rng);
        let depth = rng.gen_range(2..=6);
        let c = p.stage(depth);
        (FilterSeed::of_point(&p, depth), c)
    } else {
        let c: S = random_rational(rng, 16, 4);
        let k = rng.gen_range(1..=4);
        let gens = (0..k)
            .map(|_| {
                let r = S::from_frac(rng.gen_range(2..=16), 8);
                let shift = r.clone() * S::from_frac(rng.gen_range(-3..=3), 8);
                line_ball(c.clone() + shift, r)
            })
            .collect();
        (FilterSeed::new(gens).expect("non-empty positive generators"), c)
    }
}

/// `regularize` is idempotent and lands inside the original filter.
pub fn regularization_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    const E: u32 = 64;
    let mut rng = cfg.rng(3);
    let parts: Vec<Tally> = seeds(&mut rng, cfg.seeds)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = Tally::default();
            let (f, c) = random_seed::<S>(&mut rng);
            let gens = || json!(f.generators().iter().map(|g| g.to_json()).collect::<Vec<_>>());
            let r1 = match f.regularize(E) {
                Ok(r) => r,
                Err(e) => {
                    t.check("regularize_accepts_seed", false, || json!({ "seed": gens(), "error": e.to_string() }));
                    return t;
                }
            };
            t.check("regularize_accepts_seed", true, Value::default);
            let r2 = r1.regularize(E).expect("a regular seed regularizes");
            t.check(
                "generators_kept",
                r1.is_regular() && r1.generators().len() == f.generators().len(),
                gens,
            );
            let mut probes: Vec<BallOpen<RationalLine<S>>> = f.generators().to_vec();
            for g in f.generators() {
                probes.push(g.neighborhood(&S::from_frac(1, 64)).expect("positive margin"));
            }
            for _ in 0..8 {
                let shift: S = random_rational(&mut rng, 8, 8);
                probes.push(line_ball(c.clone() + shift, S::from_frac(rng.gen_range(1..=24), 8)));
            }
            for v in &probes {
                let a1 = r1.member(v, E).expect("same carrier");
                let a2 = r2.member(v, E).expect("same carrier");
                let ctx = || json!({ "seed": gens(), "probe": v.to_json() });
                t.check("idempotent", a1 == a2, ctx);
                if a1.is_yes() {
                    t.check("regular_subfilter", f.member_upward(v, E).is_yes(), ctx);
                }
            }
            t
        })
        .collect();
    merge_all(parts).outcome("regularization", json!({ "seeds": cfg.seeds, "effort": E }))
}

// ---------------------------------------------------------------------
// exact reals

/// A random expression; `mul` bounds are set from the exact factor values
/// and capped at 16, falling back to `add` when a factor is too large.
pub fn random_real_expr<S: Scalar>(rng: &mut impl Rng, depth: u32) -> RealExpr<S> {
    if depth == 0 || rng.gen_bool(0.2) {
        return RealExpr::Num(random_rational(rng, 12, 7));
    }
    let sub = |rng: &mut dyn RngCore| Box::new(random_real_expr::<S>(&mut ChaCha8Rng::seed_from_u64(rng.next_u64()), depth - 1));
    match rng.gen_range(0..7) {
        0 => RealExpr::Add(sub(rng), sub(rng)),
        1 => RealExpr::Sub(sub(rng), sub(rng)),
        2 => RealExpr::Max(sub(rng), sub(rng)),
        3 => RealExpr::Min(sub(rng), sub(rng)),
        4 => RealExpr::Neg(sub(rng)),
        5 => RealExpr::Abs(sub(rng)),
        _ => {
            let (a, b) = (sub(rng), sub(rng));
            let size = a.exact().abs().max(b.exact().abs());
            let bound = size.floor() + S::one();
            if bound <= S::from_int(16) {
                let bound = bound.to_string().parse::<u32>().expect("small integer bound");
                RealExpr::Mul(a, b, bound)
            } else {
                RealExpr::Add(a, b)
            }
        }
    }
}

/// Certified evaluation agrees with exact rational evaluation.
pub fn exact_real_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    let mut rng = cfg.rng(4);
    let exprs: Vec<RealExpr<S>> = (0..cfg.expressions).map(|_| random_real_expr(&mut rng, cfg.expression_depth)).collect();
    let n = cfg.precision;
    let tol = pow2_neg::<S>(n);
    let parts: Vec<Tally> = exprs
        .par_iter()
        .map(|e| {
            let mut t = Tally::default();
            let exact = e.exact();
            let ctx = || json!({ "expr": e.to_string(), "exact": exact.to_string() });
            match e.eval() {
                Ok(x) => {
                    let a = x.approx(n);
                    t.check("within_tolerance", (a.clone() - exact.clone()).abs() < tol, ctx);
                    let d = certified_decimal(&x, n);
                    t.check("decimal_within_tolerance", (d - exact.clone()).abs() < tol, ctx);
                }
                Err(err) => t.check("evaluates", false, || json!({ "expr": e.to_string(), "error": err.to_string() })),
            }
            t
        })
        .collect();
    merge_all(parts).outcome("exact_reals", json!({ "expressions": cfg.expressions, "bits": n }))
}

// ---------------------------------------------------------------------
// extension by density

/// Piecewise-linear maps on the rationals with a known Lipschitz constant.
#[derive(Debug, Clone)]
pub enum DenseMap<S> {
    Affine { a: S, b: S },
    Tent { a: S, c: S, b: S },
    Clamp { a: S, lo: S, hi: S },
}

impl<S: Scalar> DenseMap<S> {
    pub fn random(rng: &mut impl Rng) -> Self {
        let a = loop {
            let k = rng.gen_range(-16..=16);
            if k != 0 {
                break S::from_frac(k, 4);
            }
        };
        match rng.gen_range(0..3) {
            0 => DenseMap::Affine { a, b: random_rational(rng, 8, 4) },
            1 => DenseMap::Tent { a, c: random_rational(rng, 8, 4), b: random_rational(rng, 8, 4) },
            _ => {
                let lo: S = random_rational(rng, 8, 4);
                let hi = lo.clone() + S::from_frac(rng.gen_range(1..=16), 4);
                DenseMap::Clamp { a, lo, hi }
            }
        }
    }

    pub fn eval(&self, x: &S) -> S {
        match self {
            DenseMap::Affine { a, b } => a.clone() * x.clone() + b.clone(),
            DenseMap::Tent { a, c, b } => a.clone() * (x.clone() - c.clone()).abs() + b.clone(),
            DenseMap::Clamp { a, lo, hi } => a.clone() * x.clone().max(lo.clone()).min(hi.clone()),
        }
    }

    /// An integer strictly above the Lipschitz constant.
    pub fn lipschitz_ceiling(&self) -> S {
        let a = match self {
            DenseMap::Affine { a, .. } | DenseMap::Tent { a, .. } | DenseMap::Clamp { a, .. } => a.abs(),
        };
        a.floor() + S::one()
    }

    pub fn describe(&self) -> String {
        match self {
            DenseMap::Affine { a, b } => format!("{a}*x + {b}"),
            DenseMap::Tent { a, c, b } => format!("{a}*|x - {c}| + {b}"),
            DenseMap::Clamp { a, lo, hi } => format!("{a}*clamp(x, {lo}, {hi})"),
        }
    }
}

/// Two valid moduli give extensions that agree on every probe.
pub fn extension_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    const E: u32 = 64;
    let mut rng = cfg.rng(5);
    let probes_n = cfg.extension_probes;
    let parts: Vec<Tally> = seeds(&mut rng, cfg.extensions)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = Tally::default();
            let f = DenseMap::<S>::random(&mut rng);
            let l = f.lipschitz_ceiling();
            let ctx = || json!({ "map": f.describe() });
            let linear = Modulus::linear(S::one() / l.clone());
            let l2 = l.clone();
            let squared = Modulus::new(move |eps: &S| {
                let e = eps.clone().min(S::one());
                e.clone() * e / (S::one() + l2.clone())
            });
            let samples: Vec<(S, S)> = (0..6)
                .map(|_| {
                    let a: S = random_rational(&mut rng, 16, 8);
                    let b = a.clone() + S::from_frac(rng.gen_range(-8..=8), 64);
                    (a, b)
                })
                .collect();
            let build = |m: Modulus<S>| {
                let g = f.clone();
                extend_by_density(RationalLine::new(), RationalLine::new(), move |x: &S| g.eval(x), m, MapClass::Uniform, &samples)
            };
            let (e1, e2) = match (build(linear), build(squared)) {
                (Ok(a), Ok(b)) => (a, b),
                (a, b) => {
                    let err = a.err().or(b.err()).map(|e| e.to_string());
                    t.check("moduli_accepted", false, || json!({ "map": f.describe(), "error": err }));
                    return t;
                }
            };
            t.check("moduli_accepted", true, Value::default);
            let tol = pow2_neg::<S>(20);
            for k in 0..probes_n {
                let p = random_line_point::<S>(&mut rng);
                let (y1, y2) = match (e1.apply(&p), e2.apply(&p)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => {
                        t.check("extensions_apply", false, ctx);
                        continue;
                    }
                };
                let d = y1.distance(&y2).expect("same carrier");
                t.check("extensions_agree", d.below(&tol, E).is_yes(), || json!({ "map": f.describe(), "probe": k }));
                if k % 4 == 0 {
                    // on carrier points the extension is the dense map itself
                    let x: S = random_rational(&mut rng, 16, 8);
                    let img = e1.apply(&CompletionPoint::of_carrier(RationalLine::new(), x.clone())).expect("total map");
                    let exact = CompletionPoint::of_carrier(RationalLine::new(), f.eval(&x));
                    let d = img.distance(&exact).expect("same carrier");
                    t.check("extends_dense_map", d.below(&tol, E).is_yes(), ctx);
                }
            }
            t
        })
        .collect();
    merge_all(parts).outcome(
        "extension_uniqueness",
        json!({ "maps": cfg.extensions, "probes_per_map": probes_n, "tolerance_bits": 20 }),
    )
}

// ---------------------------------------------------------------------
// function locale

type LineMap<S> = MapRep<RationalLine<S>, RationalLine<S>>;

/// A random metric map of the line with a readable label.
pub fn random_metric_map<S: Scalar>(rng: &mut impl Rng) -> LineMap<S> {
    let line = RationalLine::<S>::new();
    let a = S::from_frac(rng.gen_range(-4..=4), 4);
    let b: S = random_rational(rng, 8, 4);
    let c: S = random_rational(rng, 8, 4);
    let (label, f): (String, Box<dyn Fn(&S) -> S + Send + Sync>) = match rng.gen_range(0..4) {
        0 => (format!("{a}*x + {b}"), Box::new(move |x: &S| a.clone() * x.clone() + b.clone())),
        1 => (format!("{a}*|x - {c}| + {b}"), Box::new(move |x: &S| a.clone() * (x.clone() - c.clone()).abs() + b.clone())),
        2 => (format!("max(x, {c})"), Box::new(move |x: &S| x.clone().max(c.clone()))),
        _ => {
            let (lo, hi) = (c.clone().min(b.clone()), c.clone().max(b.clone()));
            (format!("clamp(x, {lo}, {hi})"), Box::new(move |x: &S| x.clone().max(lo.clone()).min(hi.clone())))
        }
    };
    MapRep::from_point_map(line.clone(), line, f, Modulus::identity(), MapClass::Metric).with_label(label)
}

struct InstanceGen<'a, S: Scalar> {
    f: &'a LineMap<S>,
}

impl<S: Scalar> InstanceGen<'_, S> {
    fn image(&self, x: &S) -> S {
        self.f.on_carrier(x).stage(24)
    }

    fn source_open(&self, rng: &mut impl Rng, min: usize) -> BallOpen<RationalLine<S>> {
        let k = rng.gen_range(min..=3);
        let balls = (0..k)
            .map(|_| FormalBall { center: S::from_frac(rng.gen_range(-12..=12), 4), radius: S::from_frac(rng.gen_range(1..=12), 8) })
            .collect();
        BallOpen::new(RationalLine::new(), balls).expect("positive radii")
    }

    /// Balls near images of centers of `u`, so premises often hold.
    fn target_open(&self, rng: &mut impl Rng, u: &BallOpen<RationalLine<S>>) -> BallOpen<RationalLine<S>> {
        let k = rng.gen_range(0..=3);
        let balls = (0..k)
            .map(|_| {
                let base = match u.balls().get(rng.gen_range(0..u.len().max(1))) {
                    Some(b) => self.image(&b.center),
                    None => S::zero(),
                };
                FormalBall {
                    center: base + S::from_frac(rng.gen_range(-4..=4), 8),
                    radius: S::from_frac(rng.gen_range(1..=16), 8),
                }
            })
            .collect();
        BallOpen::new(RationalLine::new(), balls).expect("positive radii")
    }

    fn shrink(&self, rng: &mut impl Rng, u: &BallOpen<RationalLine<S>>) -> BallOpen<RationalLine<S>> {
        let mut balls = Vec::new();
        for b in u.balls() {
            if rng.gen_bool(0.7) {
                let radius = b.radius.clone() * S::from_frac(rng.gen_range(1..=4), 4);
                balls.push(FormalBall { center: b.center.clone(), radius });
            }
        }
        BallOpen::new(RationalLine::new(), balls).expect("positive radii")
    }

    fn instance(&self, rng: &mut impl Rng) -> MmInstance<RationalLine<S>, RationalLine<S>> {
        let q = |rng: &mut dyn RngCore| S::from_frac(rng.gen_range(1..=16) as i64, 8);
        match rng.gen_range(0..6) {
            0 => {
                let u = self.source_open(rng, 0);
                let v = self.target_open(rng, &u);
                MmInstance::Mm1 { u_small: self.shrink(rng, &u), v_small: self.shrink(rng, &v), u, v }
            }
            1 => {
                let u = self.source_open(rng, 0);
                MmInstance::Mm2 { v: self.target_open(rng, &u), u, q: q(rng) }
            }
            2 => MmInstance::Mm3 { u: self.source_open(rng, 1), q: q(rng) },
            3 => {
                let u = self.source_open(rng, 0);
                MmInstance::Mm4 { v: self.target_open(rng, &u), u }
            }
            4 => {
                let c1 = S::from_frac(rng.gen_range(-12..=12), 4);
                let r1 = S::from_frac(rng.gen_range(1..=8), 8);
                let r2 = S::from_frac(rng.gen_range(1..=8), 8);
                let c2 = c1.clone() + r1.clone() * S::from_frac(rng.gen_range(-3..=3), 4);
                let s = (r1.clone() - (c2.clone() - c1.clone()).abs()).min(r2.clone()) / S::from_int(2);
                let q1 = r1.clone() * S::from_int(2) + q(rng);
                let q2 = r2.clone() * S::from_int(2) + q(rng);
                let around = |rng: &mut dyn RngCore, x: &S, q: &S| {
                    let y = self.image(x) + S::from_frac(rng.gen_range(-2..=2) as i64, 8);
                    let big = q.clone() + S::from_frac(rng.gen_range(1..=16) as i64, 8);
                    (line_ball(y.clone(), big.clone()), line_ball(y, big - q.clone()))
                };
                let (v1, v1p) = around(rng, &c1, &q1);
                let (v2, v2p) = around(rng, &c2, &q2);
                MmInstance::Mm5 {
                    w1: line_ball(c1, r1),
                    w2: line_ball(c2.clone(), r2),
                    tau: line_ball(c2, s),
                    q1,
                    q2,
                    v1,
                    v2,
                    v1p,
                    v2p,
                }
            }
            _ => {
                let u = self.source_open(rng, 0);
                MmInstance::Mm6 { v: self.target_open(rng, &u), vp: self.target_open(rng, &u), u }
            }
        }
    }
}

/// Axioms never fail on validated metric maps, and `tau` rebuilt from
/// the proposition oracle is sound with good coverage.
pub fn function_locale_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    let mut rng = cfg.rng(6);
    let mut maps_rng = cfg.rng(60);
    let maps: Vec<LineMap<S>> = (0..cfg.locale_maps).map(|_| random_metric_map(&mut maps_rng)).collect();
    let map_seeds = seeds(&mut rng, maps.len());
    let mut coverage = Vec::with_capacity(maps.len());
    let mut verdicts: BTreeMap<String, usize> = BTreeMap::new();
    let mut tally = Tally::default();
    for (f, seed) in maps.iter().zip(map_seeds) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let label = || json!({ "map": f.label() });
        let samples: Vec<(S, S)> = (0..8)
            .map(|_| (random_rational(&mut rng, 12, 4), random_rational(&mut rng, 12, 4)))
            .collect();
        let class = classify_map(f, &samples, 64);
        tally.check("map_validated", class.verdict == Verdict::Pass, label);

        let gen = InstanceGen { f };
        let instances: Vec<_> = (0..cfg.locale_instances).map(|_| gen.instance(&mut rng)).collect();
        let effort = cfg.locale_effort;
        let results: Vec<Result<_, _>> = instances.par_iter().map(|inst| check_axiom(inst, f, effort)).collect();
        for (inst, res) in instances.iter().zip(results) {
            match res {
                Ok(rep) => {
                    *verdicts.entry(format!("{}:{:?}", rep.axiom, rep.result)).or_default() += 1;
                    tally.check("axiom_never_fails", rep.result != Verdict::Fail, || {
                        json!({ "map": f.label(), "axiom": rep.axiom, "witness": rep.witness })
                    });
                }
                Err(e) => tally.check("instance_well_formed", false, || {
                    json!({ "map": f.label(), "axiom": inst.tag(), "error": e.to_string() })
                }),
            }
        }

        let center = gen.image(&S::zero());
        let v = line_ball(center, S::from_int(2));
        let probes: Vec<_> = (0..cfg.round_trip_probes)
            .map(|_| {
                let x = S::from_frac(rng.gen_range(-64..=64), 32);
                if rng.gen_bool(0.5) {
                    CompletionPoint::of_carrier(RationalLine::new(), x)
                } else {
                    let w = S::from_frac(rng.gen_range(1..=7), 8);
                    CompletionPoint::from_stages(RationalLine::new(), move |n| x.clone() + w.clone() * pow2_neg::<S>(n + 1))
                }
            })
            .collect();
        let grid = LineGrid::new(S::from_int(-3), S::from_int(3), 5);
        let rt = round_trip(f, &v, &probes, &grid, cfg.round_trip_effort);
        tally.check("round_trip_sound", rt.violations.is_empty(), || json!({ "map": f.label(), "violations": rt.violations }));
        tally.check("round_trip_coverage", rt.coverage_percent >= 80, || {
            json!({ "map": f.label(), "coverage_percent": rt.coverage_percent })
        });
        coverage.push(json!({ "map": f.label(), "coverage_percent": rt.coverage_percent, "in_preimage": rt.in_preimage }));
    }
    tally.outcome(
        "function_locale",
        json!({
            "maps": cfg.locale_maps,
            "instances_per_map": cfg.locale_instances,
            "effort": cfg.locale_effort,
            "round_trip_effort": cfg.round_trip_effort,
            "verdicts": verdicts,
            "coverage": coverage,
        }),
    )
}

// ---------------------------------------------------------------------
// finite Gelfand duality

/// Admissibility theorem, spectrum, C* identity and duality round trip.
pub fn gelfand_laws<S: Scalar>(cfg: &LawConfig) -> LawOutcome {
    const K: u32 = 20;
    let mut rng = cfg.rng(7);
    let mut t = Tally::default();
    let grid: Vec<S> = (-2..=2).map(S::from_int).collect();
    let mut theorem = Vec::new();
    for n in 1..=2 {
        let x = DiscreteSpace::new(n).expect("small space");
        let rep = admissibility_theorem_check(&x, &Enumeration::Exhaustive { grid: grid.clone(), per_side: 2 });
        t.check("admissibility_exhaustive", rep.verdict == Verdict::Pass, || json!(rep.first_discrepancy));
        theorem.push(json!({ "n": n, "mode": "exhaustive", "instances": rep.instances, "admissible": rep.admissible }));
    }
    let half_grid: Vec<S> = (-4..=4).map(|k| S::from_frac(k, 2)).collect();
    let x3 = DiscreteSpace::new(3).expect("small space");
    let how = Enumeration::Random { grid: half_grid, per_side: 3, count: cfg.theorem_random, seed: rng.next_u64() };
    let rep = admissibility_theorem_check(&x3, &how);
    t.check("admissibility_random", rep.verdict == Verdict::Pass, || json!(rep.first_discrepancy));
    theorem.push(json!({ "n": 3, "mode": "random", "instances": rep.instances, "admissible": rep.admissible }));

    for n in 1..=cfg.spectrum_max_n {
        let chars = spectrum_of_cn::<S>(n);
        t.check("spectrum_size", chars.len() == n, || json!({ "n": n }));
        let samples: Vec<_> = (0..2).map(|_| random_element::<S>(&mut rng, n, 3)).collect();
        let verdicts: Vec<Verdict> = chars
            .par_iter()
            .map(|c| verify_character(c, &samples, K).map(|r| r.verdict).unwrap_or(Verdict::Fail))
            .collect();
        for (i, v) in verdicts.into_iter().enumerate() {
            t.check("character_verified", v == Verdict::Pass, || json!({ "n": n, "character": i }));
        }
    }

    let elems: Vec<_> = (0..cfg.cstar_samples)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            (random_element::<S>(&mut rng, n, 3), random_element::<S>(&mut rng, n, 3))
        })
        .collect();
    let cstar: Vec<_> = elems
        .par_iter()
        .map(|(a, b)| {
            let rep = cstar_identity_check(a, K, std::slice::from_ref(b)).map(|r| r.verdict).unwrap_or(Verdict::Fail);
            // ||a + b|| <= ||a|| + ||b|| at the query level
            let (na, nb) = (sup_norm(a), sup_norm(b));
            let tri = match (na.bound(K).finite().cloned(), nb.bound(K).finite().cloned()) {
                (Some(x), Some(y)) => {
                    let q = x + y + pow2_neg::<S>(K);
                    let sum = a.add(b).expect("same length");
                    sup_norm(&sum).below(&q, 4 * K).is_yes()
                }
                _ => false,
            };
            (rep, tri)
        })
        .collect();
    for (i, (rep, tri)) in cstar.into_iter().enumerate() {
        t.check("cstar_identity", rep == Verdict::Pass, || json!({ "sample": i }));
        t.check("norm_triangle", tri, || json!({ "sample": i }));
    }

    for n in 1..=cfg.duality_max_n {
        let samples: Vec<_> = (0..2).map(|_| random_element::<S>(&mut rng, n, 3)).collect();
        let rep = duality_round_trip(n, K, &samples);
        let ok = matches!(&rep, Ok(r) if r.verdict == Verdict::Pass && r.characters_found == n);
        t.check("duality_round_trip", ok, || match &rep {
            Ok(r) => json!(r),
            Err(e) => json!(e.to_string()),
        });
    }
    t.outcome(
        "gelfand_finite",
        json!({
            "theorem": theorem,
            "spectrum_max_n": cfg.spectrum_max_n,
            "cstar_samples": cfg.cstar_samples,
            "duality_max_n": cfg.duality_max_n,
            "bits": K,
        }),
    )
}

// ---------------------------------------------------------------------

/// The whole catalog, in a fixed order.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub verdict: Verdict,
    pub laws: Vec<LawOutcome>,
}

/// Names accepted by [`run_law`], in suite order.
pub const LAWS: [&str; 7] = [
    "ball_calculus",
    "completion_metric",
    "regularization",
    "exact_reals",
    "extension_uniqueness",
    "function_locale",
    "gelfand_finite",
];

pub fn run_law<S: Scalar>(name: &str, cfg: &LawConfig) -> Option<LawOutcome> {
    Some(match name {
        "ball_calculus" => ball_calculus_laws::<S>(cfg),
        "completion_metric" => completion_metric_laws::<S>(cfg),
        "regularization" => regularization_laws::<S>(cfg),
        "exact_reals" => exact_real_laws::<S>(cfg),
        "extension_uniqueness" => extension_laws::<S>(cfg),
        "function_locale" => function_locale_laws::<S>(cfg),
        "gelfand_finite" => gelfand_laws::<S>(cfg),
        _ => return None,
    })
}

/// Runs every law; `observe` sees each outcome as it completes.
pub fn run_suite_with<S: Scalar>(cfg: &LawConfig, mut observe: impl FnMut(&LawOutcome)) -> SuiteReport {
    let laws: Vec<LawOutcome> = LAWS
        .iter()
        .map(|name| {
            let out = run_law::<S>(name, cfg).expect("known law");
            observe(&out);
            out
        })
        .collect();
    let verdict = laws.iter().fold(Verdict::Pass, |v, l| v.worst(l.verdict));
    SuiteReport { seed: cfg.seed, verdict, laws }
}

pub fn run_suite<S: Scalar>(cfg: &LawConfig) -> SuiteReport {
    run_suite_with::<S>(cfg, |_| {})
}
