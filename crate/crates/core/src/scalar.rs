// SPDX-License-Identifier: Apache-2.0

//! The exact ordered-field interface shared by exponents and TE parameters.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::rational::Rational;

/// An exactly comparable ordered field element.
///
/// Implemented by [`Rational`] and by
/// [`QuadraticNumber`](crate::algebraic::QuadraticNumber). The operator
/// impls on `QuadraticNumber` panic when the two operands live in different
/// quadratic fields; every value produced by this crate stays inside a single
/// field, and the checked methods on `QuadraticNumber` are available where
/// that is not guaranteed.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + Eq
    + Ord
    + Hash
    + FromStr
    + Serialize
    + DeserializeOwned
    + From<Rational>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn checked_div(&self, other: &Self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// `Some` when the value is rational.
    fn as_rational(&self) -> Option<Rational>;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::zero()
    }

    fn one() -> Self {
        Rational::one()
    }

    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }

    fn checked_div(&self, other: &Self) -> Option<Self> {
        Rational::checked_div(self, other)
    }

    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}
