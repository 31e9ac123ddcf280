// SPDX-License-Identifier: Apache-2.0

//! Rational maps of degree at most two, their fixed points, and exact iteration.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::quadratic::{FieldError, QuadraticNumber};
use crate::rational::{rat, Rational};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("denominator polynomial is identically zero")]
    ZeroDenominator,
    #[error("numerator and denominator share the factor {0}")]
    CommonFactor(Polynomial),
    #[error("degree {0} exceeds the supported maximum of 2")]
    DegreeTooHigh(usize),
    #[error("fixed-point equation has degree {0} after clearing denominators")]
    FixedPointDegree(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Dense polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// From integer coefficients, lowest degree first.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c, 1)).collect())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval<S: Scalar>(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + S::from(c.clone()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        if rem.len() < divisor.coeffs.len() {
            return (Self::new(Vec::new()), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dc);
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&lead.recip().expect("nonzero leading coefficient"))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", c.abs()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = i == 0 || mag != Rational::one();
            match (show_coeff, i) {
                (true, 0) => write!(f, "{mag}")?,
                (true, 1) => write!(f, "{mag}*x")?,
                (true, _) => write!(f, "{mag}*x^{i}")?,
                (false, 1) => write!(f, "x")?,
                (false, _) => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

/// `numerator(x) / denominator(x)` in lowest terms, both of degree ≤ 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalMap {
    numerator: Polynomial,
    denominator: Polynomial,
}

impl RationalMap {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self, MapError> {
        if denominator.is_zero() {
            return Err(MapError::ZeroDenominator);
        }
        for p in [&numerator, &denominator] {
            if p.degree() > 2 {
                return Err(MapError::DegreeTooHigh(p.degree()));
            }
        }
        let g = numerator.gcd(&denominator);
        if g.degree() > 0 {
            return Err(MapError::CommonFactor(g));
        }
        Ok(RationalMap { numerator, denominator })
    }

    /// `α ↦ 1 − (18−17α)(3−2α)/(54(2−α))`, cleared to `(54 + 33α − 34α²)/(108 − 54α)`.
    pub fn alpha_prime() -> Self {
        Self::new(Polynomial::from_ints(&[54, 33, -34]), Polynomial::from_ints(&[108, -54]))
            .expect("valid map")
    }

    /// `α ↦ 45/28 − 9/(14α)` = `(45α − 18)/(28α)`.
    pub fn alpha_double_prime() -> Self {
        Self::new(Polynomial::from_ints(&[-18, 45]), Polynomial::from_ints(&[0, 28])).expect("valid map")
    }

    pub fn identity() -> Self {
        Self::new(Polynomial::x(), Polynomial::from_ints(&[1])).expect("valid map")
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    /// `None` when the denominator vanishes at `x`.
    pub fn eval<S: Scalar>(&self, x: &S) -> Option<S> {
        let den = self.denominator.eval(x);
        if den.is_zero() {
            return None;
        }
        Some(self.numerator.eval(x) / den)
    }

    /// `N(x) − x·D(x)`, whose roots are the candidate fixed points.
    pub fn fixed_point_polynomial(&self) -> Polynomial {
        self.numerator.sub(&Polynomial::x().mul(&self.denominator))
    }

    /// All real fixed points, exactly.
    pub fn fixed_points(&self) -> Result<FixedPoints, MapError> {
        let p = self.fixed_point_polynomial();
        let mut out = FixedPoints {
            equation: p.clone(),
            roots: Vec::new(),
            spurious: Vec::new(),
            discriminant: None,
            degenerate: false,
        };
        if p.is_zero() {
            out.degenerate = true;
            return Ok(out);
        }
        let candidates = match p.degree() {
            0 => Vec::new(),
            1 => vec![QuadraticNumber::from_rational(-(p.coeff(0) / p.coeff(1)))],
            2 => {
                let (c, b, a) = (p.coeff(0), p.coeff(1), p.coeff(2));
                let disc = &b * &b - rat(4, 1) * &a * &c;
                out.discriminant = Some(disc.clone());
                if disc.is_negative() {
                    Vec::new()
                } else {
                    let root = QuadraticNumber::sqrt_of(&disc)?;
                    let two_a = QuadraticNumber::from_rational(rat(2, 1) * &a);
                    let minus_b = QuadraticNumber::from_rational(-b);
                    let mut r = vec![
                        minus_b.checked_sub(&root)?.checked_div(&two_a)?,
                        minus_b.checked_add(&root)?.checked_div(&two_a)?,
                    ];
                    r.sort();
                    r.dedup();
                    r
                }
            }
            n => return Err(MapError::FixedPointDegree(n)),
        };
        for r in candidates {
            if self.denominator.eval(&r).is_zero() {
                out.spurious.push(r);
            } else {
                out.roots.push(r);
            }
        }
        Ok(out)
    }

    /// Iterates the map from `x0` with exact rational arithmetic.
    pub fn iterate(&self, x0: &Rational, options: &IterateOptions) -> Result<Trajectory, IterateError> {
        assert!(options.tol.is_positive(), "tolerance must be positive");
        let in_domain = |x: &Rational| match &options.domain {
            Some((lo, hi)) => lo <= x && x <= hi,
            None => true,
        };
        if !in_domain(x0) {
            return Err(IterateError::DomainExit { step: 0, last: None });
        }
        let mut iterates = vec![x0.clone()];
        let mut stop = StopReason::MaxIterations;
        let mut rounded_steps = 0usize;
        for step in 1..=options.max_iter {
            let prev = iterates.last().expect("nonempty").clone();
            if let Some(fp) = &options.fixed_point {
                if within(&QuadraticNumber::from_rational(prev.clone()).checked_sub(fp), &options.tol) {
                    stop = StopReason::WithinTolerance;
                    break;
                }
            }
            let Some(exact) = self.eval(&prev) else {
                return Err(IterateError::DomainExit { step, last: Some(prev) });
            };
            let next = match options.rounding {
                Rounding::Exact => exact,
                Rounding::Up { bits } | Rounding::Down { bits } => {
                    let r = round_preserving_order(&exact, &prev, options.rounding, bits);
                    if r != exact {
                        rounded_steps += 1;
                    }
                    r
                }
            };
            if !in_domain(&next) {
                return Err(IterateError::DomainExit { step, last: Some(prev) });
            }
            iterates.push(next.clone());
            if options.fixed_point.is_none() && (&next - &prev).abs() < options.tol {
                stop = StopReason::SuccessiveDifference;
                break;
            }
        }
        if stop == StopReason::MaxIterations {
            if let (Some(fp), Some(last)) = (&options.fixed_point, iterates.last()) {
                if within(&QuadraticNumber::from_rational(last.clone()).checked_sub(fp), &options.tol) {
                    stop = StopReason::WithinTolerance;
                }
            }
        }
        let monotonicity = Monotonicity::of(&iterates);
        Ok(Trajectory { iterates, stop, monotonicity, rounded_steps })
    }
}

fn within(diff: &Result<QuadraticNumber, FieldError>, tol: &Rational) -> bool {
    match diff {
        Ok(d) => d.abs().cmp_rational(tol) == Ordering::Less,
        Err(_) => false,
    }
}

/// Rounds `exact` to a dyadic in the requested direction, refining the grid until
/// the rounded value keeps the same strict order relative to `prev` as `exact` does.
fn round_preserving_order(exact: &Rational, prev: &Rational, rounding: Rounding, bits: u32) -> Rational {
    let target = exact.cmp(prev);
    let mut b = bits;
    while b <= 1 << 16 {
        let r = match rounding {
            Rounding::Up { .. } => exact.ceil_dyadic(b),
            Rounding::Down { .. } => exact.floor_dyadic(b),
            Rounding::Exact => exact.clone(),
        };
        if r.cmp(prev) == target && r.height_bits() < exact.height_bits() {
            return r;
        }
        if r.height_bits() >= exact.height_bits() {
            break;
        }
        b *= 2;
    }
    exact.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPoints {
    /// The cleared equation `N(x) − x·D(x) = 0`.
    pub equation: Polynomial,
    pub roots: Vec<QuadraticNumber>,
    /// Roots of the cleared equation at which the map's denominator vanishes.
    pub spurious: Vec<QuadraticNumber>,
    pub discriminant: Option<Rational>,
    /// Every point is fixed (the cleared equation is identically zero).
    pub degenerate: bool,
}

impl FixedPoints {
    /// The unique root in the closed interval, if there is exactly one.
    pub fn unique_in(&self, lo: &Rational, hi: &Rational) -> Option<QuadraticNumber> {
        let inside: Vec<_> = self
            .roots
            .iter()
            .filter(|r| r.cmp_rational(lo) != Ordering::Less && r.cmp_rational(hi) != Ordering::Greater)
            .collect();
        match inside.as_slice() {
            [one] => Some((*one).clone()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounding {
    Exact,
    /// Round each iterate up to a multiple of `2^-bits`, refining when order would break.
    Up { bits: u32 },
    Down { bits: u32 },
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    pub tol: Rational,
    pub max_iter: usize,
    /// Stop criterion measured exactly against this point when given.
    pub fixed_point: Option<QuadraticNumber>,
    /// Closed interval the trajectory must stay in.
    pub domain: Option<(Rational, Rational)>,
    pub rounding: Rounding,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions {
            tol: rat(1, 1_000_000_000_000),
            max_iter: 10_000,
            fixed_point: None,
            domain: None,
            rounding: Rounding::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IterateError {
    #[error("trajectory left the domain at step {step}; last valid iterate {last:?}")]
    DomainExit { step: usize, last: Option<Rational> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    WithinTolerance,
    SuccessiveDifference,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    StrictlyDecreasing,
    StrictlyIncreasing,
    NonIncreasing,
    NonDecreasing,
    Constant,
    None,
}

impl Monotonicity {
    fn of(xs: &[Rational]) -> Self {
        if xs.len() < 2 {
            return Monotonicity::Constant;
        }
        let ords: Vec<Ordering> = xs.windows(2).map(|w| w[1].cmp(&w[0])).collect();
        let all = |o: Ordering| ords.iter().all(|&x| x == o);
        let none = |o: Ordering| ords.iter().all(|&x| x != o);
        if all(Ordering::Equal) {
            Monotonicity::Constant
        } else if all(Ordering::Less) {
            Monotonicity::StrictlyDecreasing
        } else if all(Ordering::Greater) {
            Monotonicity::StrictlyIncreasing
        } else if none(Ordering::Greater) {
            Monotonicity::NonIncreasing
        } else if none(Ordering::Less) {
            Monotonicity::NonDecreasing
        } else {
            Monotonicity::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub iterates: Vec<Rational>,
    pub stop: StopReason,
    pub monotonicity: Monotonicity,
    /// How many iterates were replaced by a rounded dyadic.
    pub rounded_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Rational {
        self.iterates.last().expect("trajectory is never empty")
    }

    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIterations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha_star() -> QuadraticNumber {
        QuadraticNumber::new(rat(75, 40), rat(-3, 40), 145).unwrap()
    }

    #[test]
    fn alpha_prime_closed_form() {
        let f = RationalMap::alpha_prime();
        assert_eq!(f.eval(&rat(1, 1)), Some(rat(53, 54)));
        // 1 − (18−17α)(3−2α)/(54(2−α)) at α = 1/2: 1 − (19/2)(2)/(54·3/2) = 1 − 19/81
        assert_eq!(f.eval(&rat(1, 2)), Some(rat(62, 81)));
        assert_eq!(f.eval(&rat(2, 1)), None);
    }

    #[test]
    fn alpha_prime_fixed_points() {
        let fp = RationalMap::alpha_prime().fixed_points().unwrap();
        assert_eq!(fp.equation, Polynomial::from_ints(&[54, -75, 20]));
        assert_eq!(fp.roots.len(), 2);
        assert_eq!(fp.roots[0], alpha_star());
        assert_eq!(fp.roots[1], alpha_star().conjugate());
        assert_eq!(fp.unique_in(&rat(0, 1), &rat(1, 1)), Some(alpha_star()));
        for r in &fp.roots {
            assert_eq!(RationalMap::alpha_prime().eval(r).as_ref(), Some(r));
        }
    }

    #[test]
    fn degenerate_and_affine_maps() {
        assert!(RationalMap::identity().fixed_points().unwrap().degenerate);
        let half = RationalMap::new(Polynomial::new(vec![rat(0, 1), rat(1, 2)]), Polynomial::from_ints(&[1])).unwrap();
        let fp = half.fixed_points().unwrap();
        assert_eq!(fp.roots, vec![QuadraticNumber::zero()]);
        let shift = RationalMap::new(Polynomial::from_ints(&[1, 1]), Polynomial::from_ints(&[1])).unwrap();
        assert!(shift.fixed_points().unwrap().roots.is_empty());
    }

    #[test]
    fn complex_roots_report_discriminant() {
        // x ↦ (x² + 1 + x)/1 → x² + 1 = 0
        let m = RationalMap::new(Polynomial::from_ints(&[1, 1, 1]), Polynomial::from_ints(&[1])).unwrap();
        let fp = m.fixed_points().unwrap();
        assert!(fp.roots.is_empty());
        assert_eq!(fp.discriminant, Some(rat(-4, 1)));
    }

    #[test]
    fn common_factors_and_high_degree() {
        assert!(matches!(
            RationalMap::new(Polynomial::from_ints(&[0, 0, 1]), Polynomial::from_ints(&[0, 1])),
            Err(MapError::CommonFactor(_))
        ));
        // (x² − 2x)/(x − 1)² clears to a cubic
        let m = RationalMap::new(Polynomial::from_ints(&[0, -2, 1]), Polynomial::from_ints(&[1, -2, 1])).unwrap();
        assert!(matches!(m.fixed_points(), Err(MapError::FixedPointDegree(3))));
        // (x² + 1)/(2x): fixed points ±1, both away from the pole
        let m = RationalMap::new(Polynomial::from_ints(&[1, 0, 1]), Polynomial::from_ints(&[0, 2])).unwrap();
        let fp = m.fixed_points().unwrap();
        assert!(fp.spurious.is_empty());
        assert_eq!(fp.roots.len(), 2);
    }

    #[test]
    fn rejects_zero_denominator() {
        assert_eq!(
            RationalMap::new(Polynomial::x(), Polynomial::new(vec![])),
            Err(MapError::ZeroDenominator)
        );
    }

    #[test]
    fn exact_iteration_from_one() {
        let f = RationalMap::alpha_prime();
        let opts = IterateOptions { max_iter: 8, tol: rat(1, 1 << 40), ..Default::default() };
        let t = f.iterate(&rat(1, 1), &opts).unwrap();
        assert_eq!(t.iterates[1], rat(53, 54));
        assert_eq!(t.monotonicity, Monotonicity::StrictlyDecreasing);
        for x in &t.iterates {
            assert_eq!(alpha_star().cmp_rational(x), Ordering::Less);
        }
    }

    #[test]
    fn rounded_iteration_converges() {
        let f = RationalMap::alpha_prime();
        let opts = IterateOptions {
            tol: rat(1, 1_000_000_000_000),
            fixed_point: Some(alpha_star()),
            domain: Some((rat(0, 1), rat(1, 1))),
            rounding: Rounding::Up { bits: 64 },
            ..Default::default()
        };
        let t = f.iterate(&rat(1, 1), &opts).unwrap();
        assert_eq!(t.stop, StopReason::WithinTolerance);
        assert_eq!(t.monotonicity, Monotonicity::StrictlyDecreasing);
        assert!(t.iterates.len() < 40);
    }

    #[test]
    fn successive_difference_stop() {
        let half = RationalMap::new(Polynomial::new(vec![rat(0, 1), rat(1, 2)]), Polynomial::from_ints(&[1])).unwrap();
        let opts = IterateOptions { tol: rat(1, 1000), ..Default::default() };
        let t = half.iterate(&rat(1, 1), &opts).unwrap();
        assert_eq!(t.stop, StopReason::SuccessiveDifference);
        assert_eq!(t.last(), &rat(1, 1024));
    }

    #[test]
    fn domain_exit_reports_last_iterate() {
        let double = RationalMap::new(Polynomial::from_ints(&[0, 2]), Polynomial::from_ints(&[1])).unwrap();
        let opts = IterateOptions { domain: Some((rat(0, 1), rat(10, 1))), ..Default::default() };
        let err = double.iterate(&rat(3, 1), &opts).unwrap_err();
        assert_eq!(err, IterateError::DomainExit { step: 2, last: Some(rat(6, 1)) });
    }
}
