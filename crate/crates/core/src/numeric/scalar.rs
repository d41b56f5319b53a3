use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Num, Signed};

/// An exact ordered field. Every distance, radius and readout in the crate
/// lives in some `Scalar`; nothing is ever rounded implicitly.
///
/// `Ord` is required, so IEEE floats are deliberately not instances.
pub trait Scalar:
    Clone + Ord + Signed + Num + Debug + Display + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self;

    /// `n / d`. Panics when `d == 0`.
    fn from_frac(n: i64, d: i64) -> Self;

    fn floor(&self) -> Self;

    fn ceil(&self) -> Self;

    /// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.51"`.
    ///
    /// `Display` must print integer-valued scalars as a bare digit string
    /// and everything else as `"p/q"`.
    fn parse(s: &str) -> Option<Self>;
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Integer + Signed + FromStr + Debug + Display + Send + Sync + 'static,
    T: num_traits::FromPrimitive,
{
    fn from_int(n: i64) -> Self {
        Ratio::from_integer(T::from_i64(n).expect("integer fits the scalar"))
    }

    fn from_frac(n: i64, d: i64) -> Self {
        let n = T::from_i64(n).expect("integer fits the scalar");
        let d = T::from_i64(d).expect("integer fits the scalar");
        Ratio::new(n, d)
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn ceil(&self) -> Self {
        Ratio::ceil(self)
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            if s.contains('/') || frac_part.is_empty() {
                return None;
            }
            let negative = int_part.starts_with('-');
            let digits = int_part.trim_start_matches(['-', '+']);
            if !digits.chars().all(|c| c.is_ascii_digit())
                || !frac_part.chars().all(|c| c.is_ascii_digit())
            {
                return None;
            }
            let whole = format!("{}{}", if digits.is_empty() { "0" } else { digits }, frac_part);
            let numer = T::from_str(&whole).ok()?;
            let ten = T::from_i64(10)?;
            let denom = num_traits::pow(ten, frac_part.len());
            let value = Ratio::new(numer, denom);
            return Some(if negative { -value } else { value });
        }
        let parsed: Ratio<T> = s.parse().ok()?;
        Some(parsed)
    }
}

/// `2^-n` as an exact scalar.
pub fn pow2_neg<S: Scalar>(n: u32) -> S {
    S::one() / pow2(n)
}

/// `2^n` as an exact scalar.
pub fn pow2<S: Scalar>(n: u32) -> S {
    num_traits::pow(S::from_int(2), n as usize)
}

pub fn half<S: Scalar>(x: &S) -> S {
    x.clone() / S::from_int(2)
}

pub fn midpoint<S: Scalar>(a: &S, b: &S) -> S {
    half(&(a.clone() + b.clone()))
}

/// Smallest dyadic `k / 2^bits` that is `>= x`.
pub fn round_up_dyadic<S: Scalar>(x: &S, bits: u32) -> S {
    let scale = pow2::<S>(bits);
    (x.clone() * scale.clone()).ceil() / scale
}

/// Largest dyadic `k / 2^bits` that is `<= x`.
pub fn round_down_dyadic<S: Scalar>(x: &S, bits: u32) -> S {
    let scale = pow2::<S>(bits);
    (x.clone() * scale.clone()).floor() / scale
}

/// Dyadic enclosure `lo <= sqrt(x) <= hi` with `hi - lo <= 2^-bits`.
///
/// Bisection on dyadic endpoints, so denominators stay powers of two.
/// Panics on negative input.
pub fn sqrt_bounds<S: Scalar>(x: &S, bits: u32) -> (S, S) {
    assert!(!x.is_negative(), "square root of a negative scalar");
    let mut lo = S::zero();
    let mut hi = S::one();
    while hi.clone() * hi.clone() < *x {
        hi = hi * S::from_int(2);
    }
    let target = pow2_neg::<S>(bits);
    while hi.clone() - lo.clone() > target {
        let mid = midpoint(&lo, &hi);
        if mid.clone() * mid.clone() <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Renders `x` as a decimal string, rounded to nearest with `digits`
/// fractional digits. Trailing zeros are dropped.
pub fn to_decimal<S: Scalar>(x: &S, digits: u32) -> String {
    let scale = num_traits::pow(S::from_int(10), digits as usize);
    let scaled = (x.abs() * scale + half(&S::one())).floor();
    // Display of an integer-valued scalar is its plain digit string.
    let mut body = scaled.to_string();
    let width = digits as usize + 1;
    if body.len() < width {
        body = format!("{}{}", "0".repeat(width - body.len()), body);
    }
    let (int_part, frac_part) = body.split_at(body.len() - digits as usize);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if x.is_negative() && !scaled.is_zero() { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Q = Ratio<BigInt>;

    fn q(s: &str) -> Q {
        Q::parse(s).unwrap()
    }

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(q("3/4"), Q::from_frac(3, 4));
        assert_eq!(q("-2"), Q::from_int(-2));
        assert_eq!(q("0.51"), Q::from_frac(51, 100));
        assert_eq!(q("-1.5"), Q::from_frac(-3, 2));
        assert_eq!(q("6/8"), Q::from_frac(3, 4));
        assert!(Q::parse("abc").is_none());
        assert!(Q::parse("").is_none());
        assert!(Q::parse("1.").is_none());
    }

    #[test]
    fn normalized_display() {
        assert_eq!(Q::from_frac(6, 8).to_string(), "3/4");
        assert_eq!(Q::from_frac(4, 2).to_string(), "2");
        assert_eq!(Q::from_frac(-1, 3).to_string(), "-1/3");
    }

    #[test]
    fn sqrt_enclosure() {
        let (lo, hi) = sqrt_bounds(&Q::from_int(2), 20);
        assert!(lo.clone() * lo.clone() <= Q::from_int(2));
        assert!(hi.clone() * hi.clone() >= Q::from_int(2));
        assert!(hi - lo <= pow2_neg(20));
        let (lo, hi) = sqrt_bounds(&Q::from_int(25), 10);
        assert!(lo <= Q::from_int(5) && Q::from_int(5) <= hi);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&Q::from_int(1), 10), "1");
        assert_eq!(to_decimal(&Q::from_frac(1, 3), 5), "0.33333");
        assert_eq!(to_decimal(&Q::from_frac(2, 3), 5), "0.66667");
        assert_eq!(to_decimal(&Q::from_frac(-9, 4), 5), "-2.25");
        assert_eq!(to_decimal(&Q::from_frac(-1, 1000), 2), "0");
    }

    #[test]
    fn dyadic_rounding() {
        let x = Q::from_frac(1, 3);
        assert_eq!(round_up_dyadic(&x, 2), Q::from_frac(1, 2));
        assert_eq!(round_down_dyadic(&x, 2), Q::from_frac(1, 4));
    }

    #[test]
    fn machine_width_ratios_are_scalars() {
        type Q64 = Ratio<i64>;
        assert_eq!(Q64::parse("3/6"), Some(Q64::new(1, 2)));
        assert_eq!(pow2_neg::<Q64>(3), Q64::new(1, 8));
    }
}
