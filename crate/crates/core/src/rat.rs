//! Exact rational scalar shared by every checker and solver.
//!
//! All prices and quantities are carried as arbitrary-precision rationals so
//! that strict-versus-weak inequality distinctions survive arithmetic intact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_big(r: BigRational) -> Self {
        Rat(r)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    /// Lossy conversion for the floating-point islands (logit, solve_general).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Exponent overflow: fall back via string round-trip of a truncation.
            let trunc = self.0.trunc();
            trunc.to_f64().unwrap_or(f64::MAX)
        })
    }

    /// Exact conversion from a float (the binary value, not its decimal print).
    pub fn from_f64(x: f64) -> Option<Rat> {
        BigRational::from_float(x).map(Rat)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn pow10(k: usize) -> BigInt {
    let mut v = BigInt::one();
    let ten = BigInt::from(10);
    for _ in 0..k {
        v *= &ten;
    }
    v
}

/// Accepts `a/b`, integers, plain decimals and scientific notation, all
/// parsed exactly (`0.1` becomes 1/10, not the nearest float).
impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        if let Some((n, d)) = s.split_once('/') {
            let numer = BigInt::from_str(n.trim())
                .map_err(|_| ParseRatError::Invalid(s.to_string()))?;
            let denom = BigInt::from_str(d.trim())
                .map_err(|_| ParseRatError::Invalid(s.to_string()))?;
            if denom.is_zero() {
                return Err(ParseRatError::ZeroDenominator(s.to_string()));
            }
            return Ok(Rat(BigRational::new(numer, denom)));
        }
        // Decimal with optional exponent.
        let (mantissa, exp) = match s.split_once(['e', 'E']) {
            Some((m, e)) => {
                let exp: i64 = e
                    .parse()
                    .map_err(|_| ParseRatError::Invalid(s.to_string()))?;
                (m, exp)
            }
            None => (s, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['+', '-']);
        if (int_digits.is_empty() && frac_part.is_empty())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(ParseRatError::Invalid(s.to_string()));
        }
        let digits = format!("{}{}", int_digits, frac_part);
        let mut numer =
            BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
                .map_err(|_| ParseRatError::Invalid(s.to_string()))?;
        if negative {
            numer = -numer;
        }
        let mut denom = pow10(frac_part.len());
        if exp > 0 {
            numer *= pow10(exp as usize);
        } else if exp < 0 {
            denom *= pow10((-exp) as usize);
        }
        Ok(Rat(BigRational::new(numer, denom)))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatVisitor;
        impl de::Visitor<'_> for RatVisitor {
            type Value = Rat;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational as a string like \"3/4\" or a number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
                v.parse().map_err(|e| E::custom(format!("{e}")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat::int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rat, E> {
                Rat::from_f64(v).ok_or_else(|| E::custom("non-finite float"))
            }
        }
        deserializer.deserialize_any(RatVisitor)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(&self.0 / &rhs.0)
    }
}

impl<'a> Div<&'a Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self.0 / &rhs.0)
    }
}

impl Div<Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(&self.0 / rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl DivAssign<&Rat> for Rat {
    fn div_assign(&mut self, rhs: &Rat) {
        assert!(!rhs.is_zero(), "division by zero");
        self.0 /= &rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

/// Convenience for tests and fixtures: `rat("3/4")`.
pub fn rat(s: &str) -> Rat {
    s.parse().expect("valid rational literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(rat("1/2"), Rat::new(1, 2));
        assert_eq!(rat("-3/6"), Rat::new(-1, 2));
        assert_eq!(rat("3"), Rat::int(3));
        assert_eq!(rat("1.5"), Rat::new(3, 2));
        assert_eq!(rat("-0.25"), Rat::new(-1, 4));
        assert_eq!(rat("1e-9"), Rat::new(1, 1_000_000_000));
        assert_eq!(rat("2.5e2"), Rat::int(250));
    }

    #[test]
    fn rejects_bad_literals() {
        assert!("".parse::<Rat>().is_err());
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
        assert!("1.2.3".parse::<Rat>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["1/3", "-7/2", "5", "0"] {
            let r = rat(s);
            assert_eq!(r.to_string(), s);
            assert_eq!(rat(&r.to_string()), r);
        }
    }

    #[test]
    fn exact_arithmetic() {
        let third = rat("1/3");
        let sum: Rat = (0..3).map(|_| third.clone()).sum();
        assert_eq!(sum, Rat::one());
        assert!(rat("1/3") > rat("33/100"));
    }

    #[test]
    fn json_round_trip() {
        let r = rat("-22/7");
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(js, "\"-22/7\"");
        let back: Rat = serde_json::from_str(&js).unwrap();
        assert_eq!(back, r);
        let from_int: Rat = serde_json::from_str("4").unwrap();
        assert_eq!(from_int, Rat::int(4));
    }
}
