// SPDX-License-Identifier: Apache-2.0

//! Canonical text form: `mu <=~ delta^-49/50 * lambda^-101/100 * mass^1/10 ~eps`.

use super::{Bound, CalculusError, ExponentVector, Loss, Relation, Symbol};
use crate::scalar::Scalar;

pub(super) fn format_monomial<S: Scalar>(v: &ExponentVector<S>) -> String {
    if v.is_empty() {
        return "1".to_string();
    }
    let parts: Vec<String> = v
        .iter()
        .map(|(s, e)| {
            if *e == S::one() {
                s.to_string()
            } else if e.as_rational().is_some() {
                format!("{s}^{e}")
            } else {
                format!("{s}^({e})")
            }
        })
        .collect();
    parts.join(" * ")
}

pub(super) fn format_bound<S: Scalar>(b: &Bound<S>) -> String {
    let mut out = format!("{} {} {}", b.quantity(), b.relation().symbol(), format_monomial(b.rhs()));
    if b.loss() != Loss::Sharp {
        out.push(' ');
        out.push_str(b.loss().suffix());
    }
    out
}

pub(super) fn parse_bound<S: Scalar>(s: &str) -> Result<Bound<S>, CalculusError> {
    let bad = |why: &str| CalculusError::Parse(format!("{why} in `{s}`"));
    let (lhs, rel, rest) = if let Some((l, r)) = s.split_once("<=~") {
        (l, Relation::Upper, r)
    } else if let Some((l, r)) = s.split_once(">=~") {
        (l, Relation::Lower, r)
    } else {
        return Err(bad("missing relation"));
    };
    let quantity = Symbol::parse(lhs.trim())?;
    let rest = rest.trim();
    let (body, loss) = if let Some(b) = rest.strip_suffix("~log") {
        (b.trim_end(), Loss::PolyLog)
    } else if let Some(b) = rest.strip_suffix("~eps") {
        (b.trim_end(), Loss::EpsPower)
    } else {
        (rest, Loss::Sharp)
    };
    let rhs = parse_monomial(body).map_err(|e| bad(&e))?;
    Bound::new(quantity, rel, rhs, loss)
}

fn parse_monomial<S: Scalar>(body: &str) -> Result<ExponentVector<S>, String> {
    let body = body.trim();
    if body == "1" {
        return Ok(ExponentVector::new());
    }
    let mut out = ExponentVector::new();
    for factor in split_top_level(body)? {
        let factor = factor.trim();
        let (name, exp) = match factor.split_once('^') {
            Some((n, e)) => {
                let e = e.trim();
                let e = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(e);
                let value: S = e.parse().map_err(|_| format!("bad exponent `{e}`"))?;
                (n.trim(), value)
            }
            None => (factor, S::one()),
        };
        let sym = Symbol::parse(name).map_err(|e| e.to_string())?;
        if out.contains(&sym) {
            return Err(format!("symbol `{sym}` repeated"));
        }
        if exp.is_zero() {
            return Err(format!("zero exponent on `{sym}`"));
        }
        out.set(sym, exp);
    }
    Ok(out)
}

/// Splits on `*` outside parentheses.
fn split_top_level(s: &str) -> Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced parentheses".into());
                }
            }
            '*' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced parentheses".into());
    }
    parts.push(&s[start..]);
    if parts.iter().any(|p| p.trim().is_empty()) {
        return Err("empty factor".into());
    }
    Ok(parts)
}
