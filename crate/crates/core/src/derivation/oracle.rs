// SPDX-License-Identifier: Apache-2.0

//! Brute-force multiply-out calculator used only to cross-check derivations.
//!
//! Monomials are kept as unsorted factor lists with repeats, and collected by
//! a linear scan only at comparison time. No code is shared with `calculus`.

use std::collections::BTreeMap;

use super::{Derivation, Registry, Scale, StepOp};
use crate::rational::Rational;

#[derive(Clone, Debug)]
struct Mono {
    quantity: String,
    upper: bool,
    factors: Vec<(String, Rational)>,
}

fn collect(factors: &[(String, Rational)]) -> Vec<(String, Rational)> {
    let mut names: Vec<&String> = factors.iter().map(|(n, _)| n).collect();
    names.sort();
    names.dedup();
    let mut out = Vec::new();
    for n in names {
        let mut total = Rational::zero();
        for (m, e) in factors {
            if m == n {
                total = total + e.clone();
            }
        }
        if !total.is_zero() {
            out.push((n.clone(), total));
        }
    }
    out
}

fn power(factors: &[(String, Rational)], k: &Rational) -> Vec<(String, Rational)> {
    factors.iter().map(|(n, e)| (n.clone(), e * k)).collect()
}

fn exponent(factors: &[(String, Rational)], name: &str) -> Rational {
    factors.iter().filter(|(n, _)| n == name).map(|(_, e)| e.clone()).sum()
}

fn from_bound(b: &crate::calculus::Bound) -> Mono {
    Mono {
        quantity: b.quantity().to_string(),
        upper: b.relation() == crate::calculus::Relation::Upper,
        factors: b.rhs().iter().map(|(s, e)| (s.to_string(), e.clone())).collect(),
    }
}

/// Replays `d` with the oracle and asserts agreement with every recorded output.
pub(crate) fn check_derivation(d: &Derivation, reg: &Registry) {
    let mut vals: BTreeMap<String, Mono> = BTreeMap::new();
    for step in &d.steps {
        let ins: Vec<Mono> = step.inputs.iter().map(|i| vals[i].clone()).collect();
        let out = match &step.op {
            StepOp::Axiom { name } => from_bound(reg.bound(name)),
            StepOp::Hypothesis { d, a, b } => Mono {
                quantity: "volume".into(),
                upper: false,
                factors: vec![
                    ("lambda".into(), a.clone()),
                    ("delta".into(), Rational::from_integer(4) - d.clone()),
                    ("mass".into(), b.clone()),
                ],
            },
            StepOp::Interpolate { weight } | StepOp::Eliminate { weight, .. } | StepOp::MatchExponent { weight, .. } => {
                let mut f = power(&ins[0].factors, weight);
                f.extend(power(&ins[1].factors, &(Rational::one() - weight.clone())));
                Mono { factors: f, ..ins[0].clone() }
            }
            StepOp::Compose => {
                let e = exponent(&ins[0].factors, &ins[1].quantity);
                let mut f: Vec<_> = ins[0].factors.iter().filter(|(n, _)| *n != ins[1].quantity).cloned().collect();
                f.extend(power(&ins[1].factors, &e));
                Mono { factors: f, ..ins[0].clone() }
            }
            StepOp::Substitute { substitutions } => {
                let mut m = ins[0].clone();
                for (s, repl) in substitutions {
                    let repl: Vec<(String, Rational)> = repl.iter().map(|(n, e)| (n.to_string(), e.clone())).collect();
                    if m.quantity == s.as_str() {
                        m.quantity = repl[0].0.clone();
                        continue;
                    }
                    let mut f = Vec::new();
                    for (n, e) in &m.factors {
                        if n == s.as_str() {
                            f.extend(power(&repl, e));
                        } else {
                            f.push((n.clone(), e.clone()));
                        }
                    }
                    m.factors = f;
                }
                m
            }
            StepOp::Drop { symbol } => {
                let f = ins[0].factors.iter().filter(|(n, _)| n != symbol.as_str()).cloned().collect();
                Mono { factors: f, ..ins[0].clone() }
            }
            StepOp::Relax { symbol, exponent: e } => {
                let mut f: Vec<_> = ins[0].factors.iter().filter(|(n, _)| n != symbol.as_str()).cloned().collect();
                f.push((symbol.to_string(), e.clone()));
                Mono { factors: f, ..ins[0].clone() }
            }
            StepOp::DoubleCount { scale } => {
                let (vol, mu, mass) = match scale {
                    Scale::Delta => ("volume", "mu", "mass"),
                    Scale::Rho => ("volume_rho", "mu_rho", "mass_rho"),
                };
                let quantity = if ins[0].quantity == vol { mu } else { vol };
                let mut f = vec![("lambda".to_string(), Rational::one()), (mass.to_string(), Rational::one())];
                f.extend(power(&ins[0].factors, &-Rational::one()));
                Mono { quantity: quantity.into(), upper: !ins[0].upper, factors: f }
            }
            StepOp::WidenLoss { .. } => ins[0].clone(),
        };
        let recorded = &step.output;
        assert_eq!(out.quantity, recorded.quantity().as_str(), "step {}", step.id);
        assert_eq!(out.upper, recorded.relation() == crate::calculus::Relation::Upper, "step {}", step.id);
        let mine = collect(&out.factors);
        let theirs: Vec<(String, Rational)> = recorded.rhs().iter().map(|(s, e)| (s.to_string(), e.clone())).collect();
        assert_eq!(mine, theirs, "step {}", step.id);
        vals.insert(step.id.clone(), out);
    }
}
