// SPDX-License-Identifier: Apache-2.0

//! Replayable derivations built from registered axioms by calculus steps.
//!
//! Every step records its operation, its inputs by id, and its output. Replay
//! re-executes the operations from the axioms and demands identical outputs.

mod incidence;
mod lp;
mod registry;
mod restriction;
mod self_improve;
mod te;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebraic::QuadraticNumber;
use crate::calculus::{
    compose, double_count, drop_bounded, eliminate, interpolate, relax, solve_weight, substitute_rescale, Bound,
    CalculusError, CountingScale, ExponentVector, Loss, Symbol,
};
use crate::rational::Rational;
use crate::scalar::Scalar;

pub use incidence::{derive_cor_gz, derive_lemma_incidence, LemmaIncidence};
pub use lp::{optimise_delta_exponent, LpReport};
pub use registry::{base_bounds, Axiom, Registry};
pub use restriction::{derive_restriction_exponent, restriction_regression_fixture, RestrictionOutcome};
pub use self_improve::{
    check_beta_window, derive_self_improve, iterate_self_improvement, BetaWindowReport, ConditionReport,
    IterationOutcome, IterationStep, SelfImprove,
};
pub use te::TEStatement;

/// Where a step comes from: a descriptive location and the formula it produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub location: String,
    pub formula: String,
}

impl Anchor {
    pub fn new(location: &str, formula: &str) -> Self {
        Anchor { location: location.to_string(), formula: formula.to_string() }
    }

    /// For bookkeeping steps with no counterpart in the source argument.
    pub fn plumbing() -> Self {
        Anchor { location: Self::PLUMBING.to_string(), formula: String::new() }
    }

    pub const PLUMBING: &'static str = "plumbing";

    pub fn is_plumbing(&self) -> bool {
        self.location == Self::PLUMBING
    }
}

/// Which double-counting identity a step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Delta,
    Rho,
}

impl Scale {
    pub fn counting(self) -> CountingScale {
        match self {
            Scale::Delta => CountingScale::delta(),
            Scale::Rho => CountingScale::rho(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum StepOp<S: Scalar> {
    Axiom { name: String },
    /// `volume ⪆ λ^a δ^{4−d} mass^b`, assumed.
    Hypothesis { d: S, a: S, b: S },
    Interpolate { weight: S },
    Eliminate { symbol: Symbol, weight: S },
    /// Interpolate with the weight that puts `symbol` at `target`.
    MatchExponent { symbol: Symbol, target: S, weight: S },
    Compose,
    Substitute { substitutions: Vec<(Symbol, ExponentVector<S>)> },
    Drop { symbol: Symbol },
    Relax { symbol: Symbol, exponent: S },
    DoubleCount { scale: Scale },
    WidenLoss { loss: Loss },
}

impl<S: Scalar> StepOp<S> {
    pub fn name(&self) -> &'static str {
        match self {
            StepOp::Axiom { .. } => "axiom",
            StepOp::Hypothesis { .. } => "hypothesis",
            StepOp::Interpolate { .. } => "interpolate",
            StepOp::Eliminate { .. } => "eliminate",
            StepOp::MatchExponent { .. } => "solve_weight",
            StepOp::Compose => "compose",
            StepOp::Substitute { .. } => "substitute_rescale",
            StepOp::Drop { .. } => "drop_bounded",
            StepOp::Relax { .. } => "relax",
            StepOp::DoubleCount { .. } => "double_count",
            StepOp::WidenLoss { .. } => "widen_loss",
        }
    }

    /// The weight used, for interpolation-type steps.
    pub fn weight(&self) -> Option<&S> {
        match self {
            StepOp::Interpolate { weight } | StepOp::Eliminate { weight, .. } | StepOp::MatchExponent { weight, .. } => {
                Some(weight)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Step<S: Scalar> {
    pub id: String,
    #[serde(flatten)]
    pub op: StepOp<S>,
    pub inputs: Vec<String>,
    pub output: Bound<S>,
    pub anchor: Anchor,
}

/// A named equality the derivation asserted along the way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: String,
    pub label: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Outcome<S: Scalar> {
    Bound(Bound<S>),
    Scalar(S),
    Quadratic(QuadraticNumber),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Derivation<S: Scalar = Rational> {
    pub name: String,
    pub steps: Vec<Step<S>>,
    pub checkpoints: Vec<Checkpoint>,
    pub result: Outcome<S>,
    /// Distinct step locations in order of first use.
    pub anchors: Vec<String>,
}

impl<S: Scalar> Derivation<S> {
    pub fn step(&self, id: &str) -> Option<&Step<S>> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn output(&self, id: &str) -> Option<&Bound<S>> {
        self.step(id).map(|s| &s.output)
    }

    /// Re-executes every step from the registry and demands identical outputs.
    pub fn replay(&self, registry: &Registry) -> Result<(), DerivationError> {
        let mut values: BTreeMap<&str, Bound<S>> = BTreeMap::new();
        for step in &self.steps {
            let inputs: Vec<Bound<S>> = step
                .inputs
                .iter()
                .map(|i| values.get(i.as_str()).cloned().ok_or_else(|| DerivationError::UnknownInput(i.clone())))
                .collect::<Result<_, _>>()?;
            let (out, op) = execute(&step.id, &step.op, &inputs, registry)?;
            if op != step.op {
                return Err(DerivationError::Replay { step: step.id.clone(), detail: "recomputed parameters differ".into() });
            }
            if out != step.output {
                return Err(DerivationError::Replay {
                    step: step.id.clone(),
                    detail: format!("recorded {} but recomputed {}", step.output, out),
                });
            }
            values.insert(&step.id, out);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("step `{step}`: {source}")]
    Calculus { step: String, source: CalculusError },
    #[error("step `{step}` ({label}): exponent of {symbol} is {found}, expected {expected}")]
    Mismatch { step: String, label: String, symbol: String, expected: String, found: String },
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error("step id `{0}` used twice")]
    DuplicateId(String),
    #[error("replay diverged at `{step}`: {detail}")]
    Replay { step: String, detail: String },
    #[error("validity condition failed at iteration {step}: {detail}")]
    Validity { step: usize, detail: String },
    #[error("{0}")]
    Domain(String),
}

/// Runs one operation. Shared by the builder and by replay so both agree bit for bit.
fn execute<S: Scalar>(
    id: &str,
    op: &StepOp<S>,
    inputs: &[Bound<S>],
    registry: &Registry,
) -> Result<(Bound<S>, StepOp<S>), DerivationError> {
    let calc = |source: CalculusError| DerivationError::Calculus { step: id.to_string(), source };
    let table = registry.table();
    let arity = |n: usize| {
        if inputs.len() == n {
            Ok(())
        } else {
            Err(DerivationError::Replay { step: id.to_string(), detail: format!("expected {n} inputs, got {}", inputs.len()) })
        }
    };
    let out = match op {
        StepOp::Axiom { name } => {
            arity(0)?;
            let ax = registry.get(name).ok_or_else(|| DerivationError::UnknownAxiom(name.clone()))?;
            (ax.bound.map_scalar(|r| S::from(r.clone())).with_provenance(name.clone()), op.clone())
        }
        StepOp::Hypothesis { d, a, b } => {
            arity(0)?;
            (te::volume_form(d, a, b).map_err(calc)?, op.clone())
        }
        StepOp::Interpolate { weight } => {
            arity(2)?;
            (interpolate(&inputs[0], &inputs[1], weight).map_err(calc)?, op.clone())
        }
        StepOp::Eliminate { symbol, .. } => {
            arity(2)?;
            let (w, b) = eliminate(&inputs[0], &inputs[1], symbol).map_err(calc)?;
            (b, StepOp::Eliminate { symbol: symbol.clone(), weight: w })
        }
        StepOp::MatchExponent { symbol, target, .. } => {
            arity(2)?;
            let w = solve_weight(&inputs[0], &inputs[1], symbol, target).map_err(calc)?;
            let b = interpolate(&inputs[0], &inputs[1], &w).map_err(calc)?;
            (b, StepOp::MatchExponent { symbol: symbol.clone(), target: target.clone(), weight: w })
        }
        StepOp::Compose => {
            arity(2)?;
            (compose(&inputs[0], &inputs[1]).map_err(calc)?, op.clone())
        }
        StepOp::Substitute { substitutions } => {
            arity(1)?;
            let mut b = inputs[0].clone();
            for (sym, repl) in substitutions {
                b = substitute_rescale(&b, sym, repl, table).map_err(calc)?;
            }
            (b, op.clone())
        }
        StepOp::Drop { symbol } => {
            arity(1)?;
            (drop_bounded(&inputs[0], symbol, table).map_err(calc)?, op.clone())
        }
        StepOp::Relax { symbol, exponent } => {
            arity(1)?;
            (relax(&inputs[0], symbol, exponent, table).map_err(calc)?, op.clone())
        }
        StepOp::DoubleCount { scale } => {
            arity(1)?;
            (double_count(&inputs[0], &scale.counting()).map_err(calc)?, op.clone())
        }
        StepOp::WidenLoss { loss } => {
            arity(1)?;
            (inputs[0].clone().widen_loss(*loss), op.clone())
        }
    };
    // provenance lists the leaf statements a bound rests on
    match op {
        StepOp::Hypothesis { .. } => Ok((out.0.with_provenance(id.to_string()), out.1)),
        _ => Ok(out),
    }
}

/// Records steps while running them.
pub struct Builder<'r, S: Scalar> {
    registry: &'r Registry,
    steps: Vec<Step<S>>,
    values: BTreeMap<String, Bound<S>>,
    checkpoints: Vec<Checkpoint>,
    scope: String,
}

impl<'r, S: Scalar> Builder<'r, S> {
    pub fn new(registry: &'r Registry) -> Self {
        Builder { registry, steps: Vec::new(), values: BTreeMap::new(), checkpoints: Vec::new(), scope: String::new() }
    }

    /// Prefixes later step ids with `prefix`. Ids written `@id` bypass the prefix.
    pub fn set_scope(&mut self, prefix: &str) {
        self.scope = prefix.to_string();
    }

    fn resolve(&self, id: &str) -> String {
        match id.strip_prefix('@') {
            Some(abs) => abs.to_string(),
            None => format!("{}{id}", self.scope),
        }
    }

    pub fn get(&self, id: &str) -> &Bound<S> {
        &self.values[&self.resolve(id)]
    }

    fn run(&mut self, id: &str, op: StepOp<S>, inputs: &[&str], anchor: Anchor) -> Result<StepOp<S>, DerivationError> {
        let id = self.resolve(id);
        if self.values.contains_key(&id) {
            return Err(DerivationError::DuplicateId(id));
        }
        let inputs: Vec<String> = inputs.iter().map(|i| self.resolve(i)).collect();
        let bounds: Vec<Bound<S>> = inputs
            .iter()
            .map(|i| self.values.get(i).cloned().ok_or_else(|| DerivationError::UnknownInput(i.clone())))
            .collect::<Result<_, _>>()?;
        let (output, op) = execute(&id, &op, &bounds, self.registry)?;
        self.values.insert(id.clone(), output.clone());
        self.steps.push(Step { id, op: op.clone(), inputs, output, anchor });
        Ok(op)
    }

    pub fn axiom(&mut self, name: &str) -> Result<(), DerivationError> {
        let anchor = self.registry.get(name).ok_or_else(|| DerivationError::UnknownAxiom(name.into()))?.anchor.clone();
        self.run(name, StepOp::Axiom { name: name.into() }, &[], anchor).map(|_| ())
    }

    pub fn hypothesis(&mut self, id: &str, d: S, a: S, b: S, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::Hypothesis { d, a, b }, &[], anchor).map(|_| ())
    }

    pub fn interpolate(&mut self, id: &str, b1: &str, b2: &str, weight: S, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::Interpolate { weight }, &[b1, b2], anchor).map(|_| ())
    }

    pub fn eliminate(&mut self, id: &str, b1: &str, b2: &str, symbol: &str, anchor: Anchor) -> Result<S, DerivationError> {
        let op = StepOp::Eliminate { symbol: Symbol::new(symbol), weight: S::zero() };
        match self.run(id, op, &[b1, b2], anchor)? {
            StepOp::Eliminate { weight, .. } => Ok(weight),
            _ => unreachable!(),
        }
    }

    pub fn match_exponent(
        &mut self,
        id: &str,
        b1: &str,
        b2: &str,
        symbol: &str,
        target: S,
        anchor: Anchor,
    ) -> Result<S, DerivationError> {
        let op = StepOp::MatchExponent { symbol: Symbol::new(symbol), target, weight: S::zero() };
        match self.run(id, op, &[b1, b2], anchor)? {
            StepOp::MatchExponent { weight, .. } => Ok(weight),
            _ => unreachable!(),
        }
    }

    pub fn compose(&mut self, id: &str, outer: &str, inner: &str, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::Compose, &[outer, inner], anchor).map(|_| ())
    }

    pub fn substitute(
        &mut self,
        id: &str,
        input: &str,
        substitutions: Vec<(&str, ExponentVector<S>)>,
        anchor: Anchor,
    ) -> Result<(), DerivationError> {
        let substitutions = substitutions.into_iter().map(|(s, v)| (Symbol::new(s), v)).collect();
        self.run(id, StepOp::Substitute { substitutions }, &[input], anchor).map(|_| ())
    }

    pub fn drop(&mut self, id: &str, input: &str, symbol: &str, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::Drop { symbol: Symbol::new(symbol) }, &[input], anchor).map(|_| ())
    }

    pub fn relax(&mut self, id: &str, input: &str, symbol: &str, exponent: S, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::Relax { symbol: Symbol::new(symbol), exponent }, &[input], anchor).map(|_| ())
    }

    pub fn double_count(&mut self, id: &str, input: &str, scale: Scale, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::DoubleCount { scale }, &[input], anchor).map(|_| ())
    }

    pub fn widen_loss(&mut self, id: &str, input: &str, loss: Loss, anchor: Anchor) -> Result<(), DerivationError> {
        self.run(id, StepOp::WidenLoss { loss }, &[input], anchor).map(|_| ())
    }

    /// Asserts the statement at `id` (relation, quantity, exponents) equals `expected`.
    pub fn expect(&mut self, id: &str, label: &str, expected: &Bound<S>) -> Result<(), DerivationError> {
        let id = self.resolve(id);
        let got = self.values.get(&id).ok_or_else(|| DerivationError::UnknownInput(id.clone()))?;
        first_divergence(got, expected).map_or(Ok(()), |(symbol, e, f)| {
            Err(DerivationError::Mismatch { step: id.clone(), label: label.into(), symbol, expected: e, found: f })
        })?;
        self.checkpoints.push(Checkpoint { step: id, label: label.into(), expected: expected.to_string() });
        Ok(())
    }

    pub fn finish(self, name: &str, result: Outcome<S>) -> Derivation<S> {
        let mut anchors: Vec<String> = Vec::new();
        for s in &self.steps {
            if !anchors.contains(&s.anchor.location) {
                anchors.push(s.anchor.location.clone());
            }
        }
        Derivation { name: name.to_string(), steps: self.steps, checkpoints: self.checkpoints, result, anchors }
    }
}

/// First place two statements differ, as (symbol or field, expected, found).
fn first_divergence<S: Scalar>(got: &Bound<S>, expected: &Bound<S>) -> Option<(String, String, String)> {
    if got.quantity() != expected.quantity() {
        return Some(("<quantity>".into(), expected.quantity().to_string(), got.quantity().to_string()));
    }
    if got.relation() != expected.relation() {
        return Some(("<relation>".into(), expected.relation().symbol().into(), got.relation().symbol().into()));
    }
    let mut names: Vec<&Symbol> = got.rhs().symbols().chain(expected.rhs().symbols()).collect();
    names.sort();
    names.dedup();
    for s in names {
        let (g, e) = (got.rhs().get(s), expected.rhs().get(s));
        if g != e {
            return Some((s.to_string(), e.to_string(), g.to_string()));
        }
    }
    None
}

/// Shorthand for exponent vectors in derivation code.
pub(crate) fn mono<S: Scalar>(pairs: &[(&str, S)]) -> ExponentVector<S> {
    ExponentVector::from_pairs(pairs.iter().cloned())
}

pub(crate) fn q<S: Scalar>(n: i64, d: i64) -> S {
    S::from(crate::rational::rat(n, d))
}

#[cfg(test)]
pub(crate) mod oracle;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn mismatch_reports_first_divergent_exponent() {
        let reg = base_bounds();
        let mut b: Builder<Rational> = Builder::new(&reg);
        b.axiom("hairbrush").unwrap();
        let wrong = Bound::upper(
            "mu",
            mono(&[("m", rat(1, 2)), ("lambda", rat(-3, 4)), ("delta", rat(-1, 1)), ("mass", rat(1, 3))]),
            Loss::EpsPower,
        )
        .unwrap();
        let err = b.expect("hairbrush", "check", &wrong).unwrap_err();
        match err {
            DerivationError::Mismatch { symbol, expected, found, .. } => {
                assert_eq!((symbol.as_str(), expected.as_str(), found.as_str()), ("mass", "1/3", "1/2"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn duplicate_ids_are_refused() {
        let reg = base_bounds();
        let mut b: Builder<Rational> = Builder::new(&reg);
        b.axiom("hairbrush").unwrap();
        assert_eq!(b.axiom("hairbrush"), Err(DerivationError::DuplicateId("hairbrush".into())));
        assert!(matches!(b.axiom("nonsense"), Err(DerivationError::UnknownAxiom(_))));
    }

    #[test]
    fn tampered_derivation_fails_replay() {
        let reg = base_bounds();
        let mut d = derive_lemma_incidence().unwrap().derivation;
        d.replay(&reg).unwrap();
        let idx = d.steps.iter().position(|s| matches!(s.op, StepOp::Interpolate { .. })).unwrap();
        d.steps[idx].op = StepOp::Interpolate { weight: rat(2, 3) };
        assert!(matches!(d.replay(&reg), Err(DerivationError::Replay { .. })));
    }
}
