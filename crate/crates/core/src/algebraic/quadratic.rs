// SPDX-License-Identifier: Apache-2.0

//! Exact elements `a + b√d` of a real quadratic field.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::{format_scaled_decimal, Rational};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("operands live in different quadratic fields: sqrt({0}) vs sqrt({1})")]
    IncompatibleRadicands(BigInt, BigInt),
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative rational {0}")]
    NegativeRadicand(Rational),
    #[error("radicand {0} is not squarefree")]
    NotSquarefree(BigInt),
    #[error("could not certify the squarefree part of {0}")]
    FactorisationTooLarge(BigInt),
    #[error("cannot parse `{0}` as a quadratic number")]
    Parse(String),
}

/// `a + b·√d` with `d` a nonnegative squarefree integer.
///
/// Canonical form: `b = 0` exactly when `d = 0`, and `d ≠ 1`. Rationals are
/// the elements with `d = 0`, so they combine with any field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: Rational,
    b: Rational,
    d: BigInt,
}

impl QuadraticNumber {
    /// Builds `a + b√d`, checking that `d` is squarefree.
    pub fn new(a: Rational, b: Rational, d: impl Into<BigInt>) -> Result<Self, FieldError> {
        let d = d.into();
        if d.is_negative() {
            return Err(FieldError::NegativeRadicand(Rational::from_integer(d)));
        }
        if d > BigInt::one() {
            let (square, _) = squarefree_decompose(&d)?;
            if !square.is_one() {
                return Err(FieldError::NotSquarefree(d));
            }
        }
        Ok(Self::canonical(a, b, d))
    }

    pub fn from_rational(a: Rational) -> Self {
        QuadraticNumber { a, b: Rational::zero(), d: BigInt::zero() }
    }

    fn canonical(a: Rational, b: Rational, d: BigInt) -> Self {
        if d.is_zero() || b.is_zero() {
            QuadraticNumber { a, b: Rational::zero(), d: BigInt::zero() }
        } else if d.is_one() {
            QuadraticNumber { a: a + b, b: Rational::zero(), d: BigInt::zero() }
        } else {
            QuadraticNumber { a, b, d }
        }
    }

    /// √r for a nonnegative rational, as an exact element of ℚ(√f) with f the squarefree part.
    pub fn sqrt_of(r: &Rational) -> Result<Self, FieldError> {
        if r.is_negative() {
            return Err(FieldError::NegativeRadicand(r.clone()));
        }
        if r.is_zero() {
            return Ok(Self::from_rational(Rational::zero()));
        }
        // √(p/q) = √(pq)/q
        let pq = r.numer() * r.denom();
        let (s, f) = squarefree_decompose(&pq)?;
        let coeff = Rational::new(s, r.denom().clone());
        Ok(Self::canonical(Rational::zero(), coeff, f))
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn surd_coefficient(&self) -> &Rational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Self::canonical(self.a.clone(), -&self.b, self.d.clone())
    }

    /// Field norm `a² − b²d`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d.clone())
    }

    fn common_radicand(&self, other: &Self) -> Result<BigInt, FieldError> {
        match (self.is_rational(), other.is_rational()) {
            (true, true) => Ok(BigInt::zero()),
            (true, false) => Ok(other.d.clone()),
            (false, true) => Ok(self.d.clone()),
            (false, false) if self.d == other.d => Ok(self.d.clone()),
            _ => Err(FieldError::IncompatibleRadicands(self.d.clone(), other.d.clone())),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        let d = self.common_radicand(other)?;
        Ok(Self::canonical(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        let d = self.common_radicand(other)?;
        Ok(Self::canonical(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        let d = self.common_radicand(other)?;
        let dr = Rational::from_integer(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::canonical(a, b, d))
    }

    pub fn recip(&self) -> Result<Self, FieldError> {
        let n = self.norm();
        if n.is_zero() {
            // norm vanishes only at zero because d is squarefree and ≠ 1
            return Err(FieldError::DivisionByZero);
        }
        let conj = self.conjugate();
        Ok(Self::canonical(&conj.a / &n, &conj.b / &n, self.d.clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        self.common_radicand(other)?;
        self.checked_mul(&other.recip()?)
    }

    /// Exact sign, never via floating point.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with b²d
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * Rational::from_integer(self.d.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn checked_cmp(&self, other: &Self) -> Result<Ordering, FieldError> {
        Ok(self.checked_sub(other)?.signum())
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        Self::canonical(&self.a - r, self.b.clone(), self.d.clone()).signum()
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `floor(self)` computed exactly.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor();
        }
        // b√d = ±√(b²d) = ±√(P/Q) = ±√(PQ)/Q, bracket it with an integer square root
        let s = &self.b * &self.b * Rational::from_integer(self.d.clone());
        let pq = s.numer() * s.denom();
        let r = pq.sqrt();
        let approx = if self.b.is_positive() {
            Rational::new(r, s.denom().clone())
        } else {
            -Rational::new(r, s.denom().clone())
        };
        let mut n = (&self.a + &approx).floor();
        // r/Q is within 1/Q ≤ 1 of the true value; settle the last unit exactly
        loop {
            if self.cmp_rational(&Rational::from_integer(n.clone())) == Ordering::Less {
                n -= 1;
            } else if self.cmp_rational(&Rational::from_integer(&n + 1)) != Ordering::Less {
                n += 1;
            } else {
                return n;
            }
        }
    }

    /// Decimal rendering with `digits` fractional digits, rounded half up.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = Rational::from_integer(BigInt::from(10u32).pow(digits as u32));
        let shifted = Self::canonical(
            &self.a * &scale + Rational::new(1, 2),
            &self.b * &scale,
            self.d.clone(),
        );
        format_scaled_decimal(&shifted.floor(), digits)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return self.a.to_f64();
        }
        // 20 digits is ample for f64 and avoids cancellation in a + b√d
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }

    /// `(p + q*sqrt(d))/r` with integer p, q, r; the form printed by the CLI.
    pub fn surd_form(&self) -> String {
        if self.is_rational() {
            return self.a.to_string();
        }
        let r = self.a.denom().lcm(self.b.denom());
        let p = self.a.numer() * (&r / self.a.denom());
        let q = self.b.numer() * (&r / self.b.denom());
        let surd = if q.abs().is_one() {
            format!("sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", q.abs(), self.d)
        };
        let body = if p.is_zero() {
            if q.is_negative() { format!("-{surd}") } else { surd }
        } else {
            let op = if q.is_negative() { '-' } else { '+' };
            format!("{p} {op} {surd}")
        };
        if r.is_one() {
            body
        } else {
            format!("({body})/{r}")
        }
    }
}

/// Splits `n > 0` as `s² · f` with `f` squarefree, returning `(s, f)`.
///
/// Trial division by every integer up to 10^6; a cofactor below 10^18 whose
/// prime factors all exceed 10^6 has at most two of them, so a perfect-square
/// test settles it. Larger cofactors are refused rather than guessed.
pub fn squarefree_decompose(n: &BigInt) -> Result<(BigInt, BigInt), FieldError> {
    assert!(n.is_positive(), "squarefree_decompose needs a positive integer");
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(1_000_000u32);
    while p <= limit && &p * &p <= rest {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        if count > 0 {
            square *= p.pow(count / 2);
            if count % 2 == 1 {
                free *= &p;
            }
        }
        p += if p == BigInt::from(2u32) { 1 } else { 2 };
    }
    if rest.is_one() {
        return Ok((square, free));
    }
    if &p * &p > rest {
        // rest is prime
        return Ok((square, free * rest));
    }
    if rest.to_u64().is_some_and(|v| v < 1_000_000_000_000_000_000) {
        let root = rest.sqrt();
        if &root * &root == rest {
            return Ok((square * root, free));
        }
        return Ok((square, free * rest));
    }
    Err(FieldError::FactorisationTooLarge(n.clone()))
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { '-' } else { '+' };
        write!(f, "{} {} {}*sqrt({})", self.a, sign, self.b.abs(), self.d)
    }
}

impl fmt::Debug for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for QuadraticNumber {
    type Err = FieldError;

    /// Parses `a`, `a + b*sqrt(d)`, `a - b*sqrt(d)`, or `b*sqrt(d)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).map(str::to_string).unwrap_or(t);
        let Some(sq) = t.find("sqrt(") else {
            return t.parse::<Rational>().map(Self::from_rational).map_err(|_| bad());
        };
        let close = t[sq..].find(')').ok_or_else(bad)? + sq;
        if close != t.len() - 1 {
            return Err(bad());
        }
        let d: BigInt = t[sq + 5..close].parse().map_err(|_| bad())?;
        let head = &t[..sq];
        // head is "<a><sign><b>*" or "<b>*" or "<sign>" or ""
        let head = head.strip_suffix('*').unwrap_or(head);
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !head[..i].ends_with(['e', 'E', '/']))
            .map(|(i, _)| i)
            .last();
        let (a_txt, b_txt) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("", head),
        };
        let a = if a_txt.is_empty() { Rational::zero() } else { a_txt.parse().map_err(|_| bad())? };
        let b = match b_txt {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => other.strip_prefix('+').unwrap_or(other).parse().map_err(|_| bad())?,
        };
        QuadraticNumber::new(a, b, d)
    }
}

impl Serialize for QuadraticNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuadraticNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for QuadraticNumber {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl PartialOrd for QuadraticNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticNumber {
    /// Panics when the operands come from different fields; see [`QuadraticNumber::checked_cmp`].
    fn cmp(&self, other: &Self) -> Ordering {
        self.checked_cmp(other).expect("comparison across quadratic fields")
    }
}

macro_rules! panicking_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: QuadraticNumber) -> QuadraticNumber {
                self.$checked(&rhs).expect(concat!("quadratic ", stringify!($method)))
            }
        }
        impl<'a> $trait<&'a QuadraticNumber> for &'a QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: &'a QuadraticNumber) -> QuadraticNumber {
                self.$checked(rhs).expect(concat!("quadratic ", stringify!($method)))
            }
        }
    };
}

panicking_op!(Add, add, checked_add);
panicking_op!(Sub, sub, checked_sub);
panicking_op!(Mul, mul, checked_mul);
panicking_op!(Div, div, checked_div);

impl Neg for QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber::canonical(-self.a, -self.b, self.d)
    }
}

impl Scalar for QuadraticNumber {
    fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn checked_div(&self, other: &Self) -> Option<Self> {
        QuadraticNumber::checked_div(self, other).ok()
    }

    fn to_f64(&self) -> f64 {
        QuadraticNumber::to_f64(self)
    }

    fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.a.clone())
    }
}
