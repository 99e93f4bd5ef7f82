//! Exact rational scalars and the tropical value type `Rational ∪ {∞}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept reduced with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or `"n"`. Whitespace and explicit `+` signs are rejected so
/// that the text form stays canonical.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let int_part = |t: &str| -> Result<BigInt, ParseRationalError> {
        let digits = t.strip_prefix('-').unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        BigInt::from_str(t).map_err(|_| err())
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(int_part(s)?)),
        Some((p, q)) => {
            let p = int_part(p)?;
            let q = int_part(q)?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Canonical text form: `"n"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via the continued-fraction convergents and semiconvergents.
pub fn approximate(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let exact = Rational::from_float(x)?;
    let max_den = BigInt::from(max_den.max(1));
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rem = exact.clone();
    loop {
        let a = rem.floor().to_integer();
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            // largest semiconvergent still under the bound
            let k = (&max_den - &q0).div_floor(&q1);
            let cand_semi = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
            let cand_conv = Rational::new(p1.clone(), q1.clone());
            let d_semi = (&cand_semi - &exact).abs();
            let d_conv = (&cand_conv - &exact).abs();
            return Some(if d_semi < d_conv { cand_semi } else { cand_conv });
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            return Some(Rational::new(p1, q1));
        }
        rem = frac.recip();
    }
}

/// An element of the tropical semifield: a finite rational or `∞`.
///
/// The derived order places every finite value below `Inf`, which is the
/// min-plus convention (`∞` is the neutral element of `min`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trop {
    Fin(Rational),
    Inf,
}

impl Trop {
    pub fn zero() -> Self {
        Trop::Fin(Rational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Trop::Fin(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Trop::Fin(r) => Some(r),
            Trop::Inf => None,
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            Trop::Fin(r) => Some(r),
            Trop::Inf => None,
        }
    }

    /// Tropical product `⊙`: ordinary addition, absorbing at `∞`.
    pub fn add(&self, other: &Trop) -> Trop {
        match (self, other) {
            (Trop::Fin(a), Trop::Fin(b)) => Trop::Fin(a + b),
            _ => Trop::Inf,
        }
    }

    pub fn add_rational(&self, c: &Rational) -> Trop {
        match self {
            Trop::Fin(a) => Trop::Fin(a + c),
            Trop::Inf => Trop::Inf,
        }
    }

    /// Tropical sum `⊕`.
    pub fn min(self, other: Trop) -> Trop {
        std::cmp::min(self, other)
    }

    pub fn parse(s: &str) -> Result<Trop, ParseRationalError> {
        match s {
            "inf" | "∞" => Ok(Trop::Inf),
            _ => parse_rational(s).map(Trop::Fin),
        }
    }
}

impl From<Rational> for Trop {
    fn from(r: Rational) -> Self {
        Trop::Fin(r)
    }
}

impl fmt::Display for Trop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trop::Fin(r) => write!(f, "{r}"),
            Trop::Inf => f.write_str("inf"),
        }
    }
}

/// Compares a finite rational against a tropical value.
pub fn cmp_fin(a: &Rational, b: &Trop) -> Ordering {
    match b {
        Trop::Fin(b) => a.cmp(b),
        Trop::Inf => Ordering::Less,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(format_rational(&ratio(2, 4)), "1/2");
        assert_eq!(format_rational(&ratio(-6, 3)), "-2");
        assert_eq!(format_rational(&ratio(3, -4)), "-3/4");
        for bad in ["", "1/0", "a", "1/", "/2", "+1", " 1", "1.5"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn trop_order_puts_infinity_on_top() {
        assert!(Trop::Fin(int(1_000_000)) < Trop::Inf);
        assert_eq!(Trop::Inf.min(Trop::Fin(int(3))), Trop::Fin(int(3)));
        assert_eq!(Trop::Inf.add(&Trop::zero()), Trop::Inf);
    }

    #[test]
    fn continued_fraction_recovers_small_rationals() {
        assert_eq!(approximate(0.5, 10).unwrap(), ratio(1, 2));
        assert_eq!(approximate(1.0 / 3.0, 100).unwrap(), ratio(1, 3));
        assert_eq!(approximate(-2.0 / 7.0 + 1e-13, 1000).unwrap(), ratio(-2, 7));
        assert_eq!(approximate(std::f64::consts::PI, 1000).unwrap(), ratio(355, 113));
        assert_eq!(approximate(3.0, 5).unwrap(), int(3));
    }

    proptest! {
        #[test]
        fn text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = ratio(p, q);
            let s = format_rational(&r);
            prop_assert_eq!(parse_rational(&s).unwrap(), r.clone());
            prop_assert_eq!(format_rational(&parse_rational(&s).unwrap()), s);
        }
    }
}
