// SPDX-License-Identifier: Apache-2.0

//! Arbitrary-precision rationals in lowest terms.
//!
//! A thin newtype over [`BigRational`] that fixes the text format (`p/q`,
//! integers printed bare), parses decimals and scientific notation exactly,
//! and serialises as a string so JSON reports never lose precision.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as a rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Exact rational number, always reduced with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "rational with zero denominator");
        Rational(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> Ordering {
        self.0.numer().sign().cmp_zero()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &other.0))
        }
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Bit length of numerator plus denominator; a proxy for arithmetic cost.
    pub fn height_bits(&self) -> u64 {
        self.0.numer().bits() + self.0.denom().bits()
    }

    pub fn to_f64(&self) -> f64 {
        // Scale down huge operands before converting so the ratio survives.
        if let Some(v) = self.0.to_f64() {
            if v.is_finite() && (v != 0.0 || self.is_zero()) {
                return v;
            }
        }
        let nb = self.0.numer().bits() as i64;
        let db = self.0.denom().bits() as i64;
        let shift = (nb.max(db) - 60).max(0) as usize;
        let n = (self.0.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (self.0.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
        if d == 0.0 {
            // denominator was shifted away: value is enormous
            return if self.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        n / d
    }

    /// Smallest dyadic `k / 2^bits` that is `>= self`.
    pub fn ceil_dyadic(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits;
        let scaled = Rational(&self.0 * BigRational::from_integer(scale.clone()));
        Rational::new(scaled.ceil(), scale)
    }

    /// Largest dyadic `k / 2^bits` that is `<= self`.
    pub fn floor_dyadic(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits;
        let scaled = Rational(&self.0 * BigRational::from_integer(scale.clone()));
        Rational::new(scaled.floor(), scale)
    }

    /// Decimal rendering with exactly `digits` fractional digits, rounded half away from zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = &self.0 * BigRational::from_integer(scale);
        let rounded = scaled.round().to_integer();
        format_scaled_decimal(&rounded, digits)
    }
}

/// Formats an integer `n` as `n / 10^digits`.
pub(crate) fn format_scaled_decimal(n: &BigInt, digits: usize) -> String {
    let neg = n.sign() == Sign::Minus;
    let mut s = n.abs().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        let split = s.len() - digits;
        s.insert(split, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

trait SignExt {
    fn cmp_zero(self) -> Ordering;
}

impl SignExt for Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p`, `p/q`, and decimals with an optional exponent (`1e-9`, `0.25`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let input = s.trim();
        let err = |reason| ParseRationalError { input: s.to_string(), reason };
        if input.is_empty() {
            return Err(err("empty"));
        }
        if let Some((n, d)) = input.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
            let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
            if d.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Rational::new(n, d));
        }
        let (mantissa, exponent) = match input.find(['e', 'E']) {
            Some(pos) => {
                let e: i64 = input[pos + 1..].parse().map_err(|_| err("bad exponent"))?;
                (&input[..pos], e)
            }
            None => (input, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("no digits"));
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(err("invalid digit"));
        }
        if exponent.abs() > 10_000 {
            return Err(err("exponent out of range"));
        }
        let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| err("bad digits"))?;
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10u32);
        let mut value = if scale >= 0 {
            Rational::from_integer(all * ten.pow(scale as u32))
        } else {
            Rational::new(all, ten.pow((-scale) as u32))
        };
        if neg {
            value = -value;
        }
        Ok(value)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Ok(Rational::from_integer(n)),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

/// `rat(p, q)` shorthand used heavily in tests and derivation scripts.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl<'a> Neg for &'a Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// Greatest common divisor helper re-exported for integer code elsewhere.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}
