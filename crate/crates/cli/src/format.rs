// SPDX-License-Identifier: Apache-2.0

//! Exact values next to 10-significant-digit decimals.

use kakeya_core::algebraic::QuadraticNumber;
use kakeya_core::calculus::Bound;
use kakeya_core::derivation::{Derivation, StepOp};
use kakeya_core::{Rational, Scalar};

pub const SIGNIFICANT: usize = 10;

/// Fractional digits that give `SIGNIFICANT` significant digits for a value near `x`.
fn fraction_digits(x: f64) -> Option<usize> {
    if x == 0.0 {
        return Some(SIGNIFICANT - 1);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let digits = SIGNIFICANT as i64 - 1 - magnitude;
    (0..=40).contains(&digits).then_some(digits as usize)
}

pub fn decimal_rational(x: &Rational) -> String {
    match fraction_digits(x.to_f64()) {
        Some(d) => x.to_decimal(d),
        None => format!("{:.9e}", x.to_f64()),
    }
}

pub fn decimal_quadratic(x: &QuadraticNumber) -> String {
    match fraction_digits(x.to_f64()) {
        Some(d) => x.to_decimal(d),
        None => format!("{:.9e}", x.to_f64()),
    }
}

/// `p/q ≈ d`, or just `p` for integers.
pub fn exact_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.to_string()
    } else {
        format!("{x} ≈ {}", decimal_rational(x))
    }
}

pub fn exact_quadratic(x: &QuadraticNumber) -> String {
    if x.is_rational() {
        exact_rational(x.rational_part())
    } else {
        format!("{} ≈ {}", x.surd_form(), decimal_quadratic(x))
    }
}

fn op_detail<S: Scalar>(op: &StepOp<S>) -> String {
    match op {
        StepOp::Axiom { name } => name.clone(),
        StepOp::Hypothesis { d, a, b } => format!("TE({d}, {a}, {b})"),
        StepOp::Interpolate { weight } => format!("t = {weight}"),
        StepOp::Eliminate { symbol, weight } => format!("{symbol}, t = {weight}"),
        StepOp::MatchExponent { symbol, target, weight } => format!("{symbol} -> {target}, t = {weight}"),
        StepOp::Compose => String::new(),
        StepOp::Substitute { substitutions } => {
            substitutions.iter().map(|(s, e)| format!("{s} -> {e}")).collect::<Vec<_>>().join(", ")
        }
        StepOp::Drop { symbol } => symbol.to_string(),
        StepOp::Relax { symbol, exponent } => format!("{symbol}^{exponent}"),
        StepOp::DoubleCount { scale } => format!("{scale:?}").to_lowercase(),
        StepOp::WidenLoss { loss } => format!("{loss:?}"),
    }
}

/// One block per step: id, operation, inputs, output and anchor.
pub fn step_table<S: Scalar>(d: &Derivation<S>) -> String {
    let mut out = format!("derivation {} ({} steps)\n", d.name, d.steps.len());
    for s in &d.steps {
        let detail = op_detail(&s.op);
        let inputs = if s.inputs.is_empty() { String::new() } else { format!(" [{}]", s.inputs.join(", ")) };
        out.push_str(&format!("  {:<22} {}{}{}\n", s.id, s.op.name(), if detail.is_empty() { String::new() } else { format!(" {detail}") }, inputs));
        out.push_str(&format!("  {:<22}   => {}\n", "", s.output));
        let anchor = if s.anchor.formula.is_empty() {
            s.anchor.location.clone()
        } else {
            format!("{}: {}", s.anchor.location, s.anchor.formula)
        };
        out.push_str(&format!("  {:<22}   @ {}\n", "", anchor));
    }
    for c in &d.checkpoints {
        out.push_str(&format!("  checked {} ({}): {}\n", c.step, c.label, c.expected));
    }
    out
}

pub fn bound_line(label: &str, b: &Bound) -> String {
    format!("{label}: {b}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use kakeya_core::algebraic::d0;
    use kakeya_core::rat;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(decimal_quadratic(&d0()), "3.054314189");
        assert_eq!(decimal_rational(&rat(53, 54)), "0.9814814815");
        assert_eq!(decimal_rational(&rat(702, 251)), "2.796812749");
        assert_eq!(exact_rational(&rat(3, 1)), "3");
        assert_eq!(decimal_rational(&"1e-50".parse().unwrap()), "1.000000000e-50");
    }
}
