// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::q;
use crate::algebraic::QuadraticNumber;
use crate::calculus::{sym, Bound, CalculusError, ExponentVector, Loss};
use crate::rational::Rational;
use crate::scalar::Scalar;

/// `volume ⪆ λ^a δ^{4−d} mass^b`.
pub(super) fn volume_form<S: Scalar>(d: &S, a: &S, b: &S) -> Result<Bound<S>, CalculusError> {
    let rhs = ExponentVector::from_pairs([
        (sym::LAMBDA, a.clone()),
        (sym::DELTA, q::<S>(4, 1) - d.clone()),
        (sym::MASS, b.clone()),
    ]);
    Bound::lower(sym::VOLUME, rhs, Loss::EpsPower)
}

/// An a priori incidence estimate `TE(d − d_slack, a − a_slack, b)`.
///
/// The exact parameters are kept apart from the slack so that quadratic
/// irrational values such as the limiting dimension stay exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TEStatement {
    pub d: QuadraticNumber,
    pub a: QuadraticNumber,
    pub b: QuadraticNumber,
    pub d_slack: Rational,
    pub a_slack: Rational,
}

impl TEStatement {
    pub fn new(d: QuadraticNumber, a: QuadraticNumber, b: QuadraticNumber) -> Result<Self, String> {
        let te = TEStatement { d, a, b, d_slack: Rational::zero(), a_slack: Rational::zero() };
        te.validate()?;
        Ok(te)
    }

    pub fn from_rationals(d: Rational, a: Rational, b: Rational) -> Result<Self, String> {
        Self::new(d.into(), a.into(), b.into())
    }

    pub fn with_slack(mut self, d_slack: Rational, a_slack: Rational) -> Result<Self, String> {
        self.d_slack = d_slack;
        self.a_slack = a_slack;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), String> {
        let four = Rational::from_integer(4);
        if self.d.cmp_rational(&(four + &self.d_slack)) == Ordering::Greater {
            return Err(format!("d = {} exceeds 4", self.d));
        }
        if self.a.cmp_rational(&self.a_slack) == Ordering::Less {
            return Err(format!("a = {} is negative after slack", self.a));
        }
        if self.b.signum() == Ordering::Less {
            return Err(format!("b = {} is negative", self.b));
        }
        if self.d_slack.is_negative() || self.a_slack.is_negative() {
            return Err("slack must be nonnegative".into());
        }
        Ok(())
    }

    pub fn effective_d(&self) -> QuadraticNumber {
        self.d.clone() - QuadraticNumber::from(self.d_slack.clone())
    }

    pub fn effective_a(&self) -> QuadraticNumber {
        self.a.clone() - QuadraticNumber::from(self.a_slack.clone())
    }

    /// Whether `self` follows from `stronger` for every λ, δ, mass in (0, 1].
    ///
    /// Lowering d, raising a, or raising b each only weakens the estimate.
    pub fn implied_by(&self, stronger: &TEStatement) -> Result<bool, crate::algebraic::FieldError> {
        Ok(self.effective_d().checked_cmp(&stronger.effective_d())? != Ordering::Greater
            && self.effective_a().checked_cmp(&stronger.effective_a())? != Ordering::Less
            && self.b.checked_cmp(&stronger.b)? != Ordering::Less)
    }

    /// The volume form with the exact (slack-free) parameters.
    pub fn to_bound(&self) -> Bound<QuadraticNumber> {
        volume_form(&self.d, &self.a, &self.b).expect("volume is never on its own right-hand side")
    }
}

impl fmt::Display for TEStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |x: &QuadraticNumber, s: &Rational| {
            let base = x.surd_form();
            if s.is_zero() {
                base
            } else {
                format!("{base} - {s}")
            }
        };
        write!(f, "TE({}, {}, {})", part(&self.d, &self.d_slack), part(&self.a, &self.a_slack), self.b.surd_form())
    }
}
