//! Property tests against exact interval and enumeration oracles.

use localic::ball::{BallOpen, FormalBall};
use localic::expr::{certified_decimal, RealExpr};
use localic::gelfand::{has_point, is_admissible, BasicOpenXR, DiscreteSpace};
use localic::{Extended, Line, Rational, Real, Scalar};
use num_traits::Signed;
use proptest::prelude::*;

fn rational(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-num..=num, 1..=den).prop_map(|(p, q)| Rational::from_frac(p, q))
}

fn positive(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (1..=num, 1..=den).prop_map(|(p, q)| Rational::from_frac(p, q))
}

fn line_open(max: usize) -> impl Strategy<Value = BallOpen<Line>> {
    prop::collection::vec((rational(16, 4), positive(8, 4)), 0..=max).prop_map(|bs| {
        let balls = bs.into_iter().map(|(c, r)| FormalBall { center: c, radius: r }).collect();
        BallOpen::new(Line::new(), balls).unwrap()
    })
}

/// Whether the open interval `(lo, hi)` is covered by the union of the
/// open intervals of `v`.
fn covered(lo: &Rational, hi: &Rational, v: &BallOpen<Line>) -> bool {
    let mut ivs: Vec<(Rational, Rational)> = v
        .balls()
        .iter()
        .map(|b| (b.center.clone() - b.radius.clone(), b.center.clone() + b.radius.clone()))
        .collect();
    ivs.sort();
    let mut reach = lo.clone();
    for (a, b) in ivs {
        if reach >= *hi {
            break;
        }
        if a < reach || (a == *lo && reach == *lo) {
            reach = reach.max(b);
        }
    }
    reach >= *hi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn way_inside_is_sound_on_the_line(u in line_open(2), v in line_open(4), q in positive(4, 4)) {
        if u.way_inside(&q, &v, 8).unwrap().is_yes() {
            for b in u.balls() {
                let lo = b.center.clone() - b.radius.clone() - q.clone();
                let hi = b.center.clone() + b.radius.clone() + q.clone();
                prop_assert!(covered(&lo, &hi, &v));
            }
        }
    }

    #[test]
    fn diameter_bound_dominates_the_spread(u in line_open(4), e in 1u32..16) {
        let bound = u.diameter_upper().bound(e);
        if let (Some(lo), Some(hi)) = (
            u.balls().iter().map(|b| b.center.clone() - b.radius.clone()).min(),
            u.balls().iter().map(|b| b.center.clone() + b.radius.clone()).max(),
        ) {
            prop_assert!(bound >= Extended::Finite(hi - lo));
        } else {
            prop_assert!(bound <= Extended::Finite(Rational::from_int(0)));
        }
    }

    #[test]
    fn neighborhood_grows_each_ball(u in line_open(3), q in positive(4, 8)) {
        let w = u.neighborhood(&q).unwrap();
        prop_assert_eq!(w.len(), u.len());
        for (a, b) in u.balls().iter().zip(w.balls()) {
            prop_assert_eq!(&a.center, &b.center);
            prop_assert_eq!(b.radius.clone(), a.radius.clone() + q.clone());
        }
        prop_assert!(u.included_in(&w, 4).unwrap().is_yes());
    }

    #[test]
    fn arithmetic_encloses_exact_values(a in rational(50, 9), b in rational(50, 9), n in 1u32..40) {
        let (x, y) = (Real::constant(a.clone()), Real::constant(b.clone()));
        let within = |p: &Real, exact: Rational| {
            let (lo, hi) = p.enclosure(n);
            lo <= exact && exact <= hi
        };
        prop_assert!(within(&x.add(&y), a.clone() + b.clone()));
        prop_assert!(within(&x.sub(&y), a.clone() - b.clone()));
        prop_assert!(within(&x.max(&y), a.clone().max(b.clone())));
        prop_assert!(within(&x.abs(), a.abs()));
        let prod = x.mul(&y, 51).unwrap();
        prop_assert!(within(&prod, a.clone() * b.clone()));
    }

    #[test]
    fn decimals_are_certified(a in rational(1000, 997), n in 1u32..50) {
        let d = certified_decimal(&Real::constant(a.clone()), n);
        let tol = Rational::from_int(1) / Rational::from_int(2).pow(n as i32);
        prop_assert!((d - a).abs() < tol);
    }

    #[test]
    fn expressions_print_and_reparse(a in rational(9, 5), b in rational(9, 5), c in rational(9, 5)) {
        let src = format!("max(sub({a}, abs({b})), mul(neg({c}), {a}, 10))");
        let e = RealExpr::<Rational>::parse(&src).unwrap();
        let again = RealExpr::<Rational>::parse(&e.to_string()).unwrap();
        prop_assert_eq!(e.exact(), again.exact());
        prop_assert_eq!(e.exact(), (a.clone() - b.abs()).max(-c * a));
    }

    #[test]
    fn admissible_exactly_when_inhabited(
        n in 1usize..=3,
        lowers in prop::collection::vec((1u64..8, -2i64..=2), 0..=3),
        uppers in prop::collection::vec((1u64..8, -2i64..=2), 0..=3),
    ) {
        let x = DiscreteSpace::new(n).unwrap();
        let mask = (1u64 << n) - 1;
        let side = |cs: &[(u64, i64)]| -> Vec<(u64, Rational)> {
            cs.iter().map(|&(s, q)| (s & mask, Rational::from_int(q))).filter(|(s, _)| *s != 0).collect()
        };
        let b = BasicOpenXR::new(side(&lowers), side(&uppers));
        let adm = is_admissible(&b, &x).unwrap();
        let point = has_point(&b, &x).unwrap();
        prop_assert_eq!(adm, point.is_some());
        if let Some(f) = point {
            prop_assert!(b.satisfied_by(&f));
        }
        let (_, back) = BasicOpenXR::<Rational>::from_json(&b.to_json(&x)).unwrap();
        prop_assert_eq!(back, b);
    }
}
