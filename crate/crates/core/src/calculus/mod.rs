// SPDX-License-Identifier: Apache-2.0

//! One-monomial power bounds in positive parameters.
//!
//! A [`Bound`] states `quantity ⪅ Π symᵉ` or `quantity ⪆ Π symᵉ` with exact
//! exponents. Implicit constants and small-power losses are never written into
//! the exponents; they are summarised by a [`Loss`] class instead.

mod ops;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::scalar::Scalar;

pub use ops::{
    compose, double_count, drop_bounded, eliminate, interpolate, interpolate_many, relax, solve_weight,
    substitute_rescale, CountingScale,
};

/// A named positive parameter or quantity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Symbol(String);

impl Symbol {
    /// Panics on an invalid identifier; use [`Symbol::parse`] for untrusted input.
    pub fn new(name: &str) -> Self {
        Self::parse(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn parse(name: &str) -> Result<Self, CalculusError> {
        let mut chars = name.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok {
            Ok(Symbol(name.to_string()))
        } else {
            Err(CalculusError::Parse(format!("`{name}` is not a symbol name")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Symbol {
    type Error = CalculusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Symbol::parse(&s)
    }
}

impl From<Symbol> for String {
    fn from(s: Symbol) -> String {
        s.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Where a parameter lives, which decides when a factor may be discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `0 < x ≲ 1`
    AtMostOne,
    /// `x ≳ 1`
    AtLeastOne,
    Free,
}

/// Registered symbols and their domains; a domain never changes once set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    entries: BTreeMap<Symbol, Domain>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The parameters and quantities used by the bundled derivations.
    pub fn standard() -> Self {
        let mut t = Self::new();
        for name in [
            sym::LAMBDA, sym::DELTA, sym::RHO, sym::MASS, sym::MASS_RATIO, sym::MASS_RHO, sym::MASS_BAR,
            sym::VOLUME, sym::VOLUME_RHO,
        ] {
            t.register(name, Domain::AtMostOne).expect("fresh table");
        }
        for name in [sym::A, sym::M, sym::D, sym::H, sym::R, sym::MU, sym::MU_TILDE, sym::MU_RHO] {
            t.register(name, Domain::AtLeastOne).expect("fresh table");
        }
        t.register(sym::INTEGRAL, Domain::Free).expect("fresh table");
        t
    }

    /// Registers `name`; re-registering with the same domain is a no-op.
    pub fn register(&mut self, name: &str, domain: Domain) -> Result<Symbol, CalculusError> {
        let s = Symbol::parse(name)?;
        match self.entries.get(&s) {
            Some(&d) if d != domain => Err(CalculusError::DomainConflict { symbol: s, registered: d, requested: domain }),
            Some(_) => Ok(s),
            None => {
                self.entries.insert(s.clone(), domain);
                Ok(s)
            }
        }
    }

    pub fn domain(&self, s: &Symbol) -> Option<Domain> {
        self.entries.get(s).copied()
    }

    pub fn require(&self, s: &Symbol) -> Result<Domain, CalculusError> {
        self.domain(s).ok_or_else(|| CalculusError::UnknownSymbol(s.clone()))
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.entries.contains_key(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, Domain)> {
        self.entries.iter().map(|(s, d)| (s, *d))
    }
}

/// Names of the standard symbols.
pub mod sym {
    pub const LAMBDA: &str = "lambda";
    pub const DELTA: &str = "delta";
    pub const RHO: &str = "rho";
    /// `δ³·#𝕋`
    pub const MASS: &str = "mass";
    /// `δ³#𝕋₁ / (ρ³#𝕋_ρ)`
    pub const MASS_RATIO: &str = "mass_ratio";
    /// `ρ³·#𝕋_ρ`
    pub const MASS_RHO: &str = "mass_rho";
    /// `δ³·#𝕋̄` for a 1-parallel subfamily
    pub const MASS_BAR: &str = "mass_bar";
    pub const VOLUME: &str = "volume";
    pub const VOLUME_RHO: &str = "volume_rho";
    pub const A: &str = "A";
    pub const M: &str = "m";
    pub const D: &str = "D";
    pub const H: &str = "h";
    pub const R: &str = "R";
    pub const MU: &str = "mu";
    pub const MU_TILDE: &str = "mu_tilde";
    pub const MU_RHO: &str = "mu_rho";
    pub const INTEGRAL: &str = "integral";
}

/// A finite map from symbols to nonzero exponents; absent means zero.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<Symbol, S>", into = "BTreeMap<Symbol, S>")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ExponentVector<S = Rational> {
    entries: BTreeMap<Symbol, S>,
}

impl<S: Scalar> ExponentVector<S> {
    pub fn new() -> Self {
        ExponentVector { entries: BTreeMap::new() }
    }

    /// Builds from `(name, exponent)` pairs, summing repeats.
    pub fn from_pairs<I, N>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (N, S)>,
        N: AsRef<str>,
    {
        let mut v = Self::new();
        for (n, e) in pairs {
            let s = Symbol::new(n.as_ref());
            let cur = v.get(&s);
            v.set(s, cur + e);
        }
        v
    }

    pub fn single(s: Symbol, e: S) -> Self {
        let mut v = Self::new();
        v.set(s, e);
        v
    }

    pub fn get(&self, s: &Symbol) -> S {
        self.entries.get(s).cloned().unwrap_or_else(S::zero)
    }

    pub fn exponent(&self, name: &str) -> S {
        self.get(&Symbol::new(name))
    }

    pub fn set(&mut self, s: Symbol, e: S) {
        if e.is_zero() {
            self.entries.remove(&s);
        } else {
            self.entries.insert(s, e);
        }
    }

    pub fn remove(&mut self, s: &Symbol) -> S {
        self.entries.remove(s).unwrap_or_else(S::zero)
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.entries.contains_key(s)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &S)> {
        self.entries.iter()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.keys()
    }

    /// Monomial product: exponents add.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, e) in &other.entries {
            let cur = out.get(s);
            out.set(s.clone(), cur + e.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Monomial power: exponents scale.
    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::new();
        for (s, e) in &self.entries {
            out.set(s.clone(), e.clone() * k.clone());
        }
        out
    }

    /// `t·self + (1−t)·other`.
    pub fn convex(&self, other: &Self, t: &S) -> Self {
        self.scale(t).add(&other.scale(&(S::one() - t.clone())))
    }

    /// Lifts rational exponents into a larger scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ExponentVector<T> {
        let mut out = ExponentVector::new();
        for (s, e) in &self.entries {
            out.set(s.clone(), f(e));
        }
        out
    }
}

impl<S: Scalar> Default for ExponentVector<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> TryFrom<BTreeMap<Symbol, S>> for ExponentVector<S> {
    type Error = CalculusError;
    fn try_from(entries: BTreeMap<Symbol, S>) -> Result<Self, Self::Error> {
        if let Some((s, _)) = entries.iter().find(|(_, e)| e.is_zero()) {
            return Err(CalculusError::Parse(format!("zero exponent stored for `{s}`")));
        }
        Ok(ExponentVector { entries })
    }
}

impl<S: Scalar> From<ExponentVector<S>> for BTreeMap<Symbol, S> {
    fn from(v: ExponentVector<S>) -> Self {
        v.entries
    }
}

impl<S: Scalar> fmt::Debug for ExponentVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_monomial(self))
    }
}

impl<S: Scalar> fmt::Display for ExponentVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_monomial(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `quantity ⪅ rhs`
    Upper,
    /// `quantity ⪆ rhs`
    Lower,
}

impl Relation {
    pub fn flipped(self) -> Self {
        match self {
            Relation::Upper => Relation::Lower,
            Relation::Lower => Relation::Upper,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Upper => "<=~",
            Relation::Lower => ">=~",
        }
    }
}

/// How much is hidden in the `≈`: ordered from none to `δ^{-ε}`-type factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    Sharp,
    PolyLog,
    EpsPower,
}

impl Loss {
    pub fn suffix(self) -> &'static str {
        match self {
            Loss::Sharp => "",
            Loss::PolyLog => "~log",
            Loss::EpsPower => "~eps",
        }
    }
}

/// `quantity ⪅ rhs` or `quantity ⪆ rhs`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BoundRepr<S>", into = "BoundRepr<S>")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Bound<S = Rational> {
    quantity: Symbol,
    relation: Relation,
    rhs: ExponentVector<S>,
    loss: Loss,
    provenance: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
struct BoundRepr<S: Scalar> {
    quantity: Symbol,
    relation: Relation,
    rhs: ExponentVector<S>,
    loss: Loss,
    #[serde(default)]
    provenance: Vec<String>,
}

impl<S: Scalar> TryFrom<BoundRepr<S>> for Bound<S> {
    type Error = CalculusError;
    fn try_from(r: BoundRepr<S>) -> Result<Self, Self::Error> {
        let mut b = Bound::new(r.quantity, r.relation, r.rhs, r.loss)?;
        b.provenance = r.provenance;
        Ok(b)
    }
}

impl<S: Scalar> From<Bound<S>> for BoundRepr<S> {
    fn from(b: Bound<S>) -> Self {
        BoundRepr { quantity: b.quantity, relation: b.relation, rhs: b.rhs, loss: b.loss, provenance: b.provenance }
    }
}

impl<S: Scalar> Bound<S> {
    pub fn new(quantity: Symbol, relation: Relation, rhs: ExponentVector<S>, loss: Loss) -> Result<Self, CalculusError> {
        if rhs.contains(&quantity) {
            return Err(CalculusError::QuantityInRhs(quantity));
        }
        Ok(Bound { quantity, relation, rhs, loss, provenance: Vec::new() })
    }

    pub fn upper(quantity: &str, rhs: ExponentVector<S>, loss: Loss) -> Result<Self, CalculusError> {
        Self::new(Symbol::parse(quantity)?, Relation::Upper, rhs, loss)
    }

    pub fn lower(quantity: &str, rhs: ExponentVector<S>, loss: Loss) -> Result<Self, CalculusError> {
        Self::new(Symbol::parse(quantity)?, Relation::Lower, rhs, loss)
    }

    pub fn quantity(&self) -> &Symbol {
        &self.quantity
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn rhs(&self) -> &ExponentVector<S> {
        &self.rhs
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn exponent(&self, name: &str) -> S {
        self.rhs.exponent(name)
    }

    pub fn with_provenance(mut self, id: impl Into<String>) -> Self {
        let id = id.into();
        if !self.provenance.contains(&id) {
            self.provenance.push(id);
        }
        self
    }

    /// Raises the loss class to at least `loss`; never lowers it.
    pub fn widen_loss(mut self, loss: Loss) -> Self {
        self.loss = self.loss.max(loss);
        self
    }

    /// Same statement, provenance cleared.
    pub fn statement(&self) -> Self {
        Bound { provenance: Vec::new(), ..self.clone() }
    }

    /// Same statement about a differently named quantity.
    pub fn renamed(&self, quantity: Symbol) -> Result<Self, CalculusError> {
        let mut b = Self::new(quantity, self.relation, self.rhs.clone(), self.loss)?;
        b.provenance = self.provenance.clone();
        Ok(b)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Bound<T> {
        Bound {
            quantity: self.quantity.clone(),
            relation: self.relation,
            rhs: self.rhs.map_scalar(f),
            loss: self.loss,
            provenance: self.provenance.clone(),
        }
    }

    pub(crate) fn with_parts(&self, rhs: ExponentVector<S>, loss: Loss, provenance: Vec<String>) -> Result<Self, CalculusError> {
        let mut b = Self::new(self.quantity.clone(), self.relation, rhs, loss)?;
        let mut unique: Vec<String> = Vec::with_capacity(provenance.len());
        for p in provenance {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        b.provenance = unique;
        Ok(b)
    }
}

impl<S: Scalar> fmt::Display for Bound<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_bound(self))
    }
}

impl<S: Scalar> fmt::Debug for Bound<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_bound(self))
    }
}

impl<S: Scalar> std::str::FromStr for Bound<S> {
    type Err = CalculusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        text::parse_bound(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("bounds concern different quantities: {left} vs {right}")]
    QuantityMismatch { left: Symbol, right: Symbol },
    #[error("bounds point in different directions")]
    RelationMismatch,
    #[error("weight {weight} lies outside [0, 1]")]
    WeightOutOfRange { weight: String },
    #[error("weights must be nonnegative and sum to 1, got sum {sum}")]
    WeightsNotConvex { sum: String },
    #[error("no weight puts the exponent of {symbol} at {target}: both inputs carry {exponent}")]
    NoSolution { symbol: Symbol, exponent: String, target: String },
    #[error("unsound direction at {symbol} (exponent {exponent}): {reason}")]
    DirectionUnsound { symbol: Symbol, exponent: String, reason: String },
    #[error("symbol `{0}` is not registered")]
    UnknownSymbol(Symbol),
    #[error("`{symbol}` is already registered as {registered:?}, not {requested:?}")]
    DomainConflict { symbol: Symbol, registered: Domain, requested: Domain },
    #[error("quantity `{0}` appears on its own right-hand side")]
    QuantityInRhs(Symbol),
    #[error("expected a bound on {expected}, found {found}")]
    WrongQuantity { expected: String, found: String },
    #[error("cannot rename quantity {quantity} to a non-trivial monomial")]
    InvalidRename { quantity: Symbol },
    #[error("parse error: {0}")]
    Parse(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn ev(pairs: &[(&str, Rational)]) -> ExponentVector {
        ExponentVector::from_pairs(pairs.iter().cloned())
    }

    #[test]
    fn zero_entries_are_never_stored() {
        let v = ev(&[("lambda", rat(1, 2)), ("lambda", rat(-1, 2)), ("delta", rat(1, 1))]);
        assert_eq!(v.len(), 1);
        assert!(!v.contains(&Symbol::new("lambda")));
        let json = r#"{"delta":"0"}"#;
        assert!(serde_json::from_str::<ExponentVector>(json).is_err());
    }

    #[test]
    fn domains_are_immutable() {
        let mut t = SymbolTable::standard();
        assert_eq!(t.domain(&Symbol::new("A")), Some(Domain::AtLeastOne));
        assert!(t.register("A", Domain::AtLeastOne).is_ok());
        assert!(matches!(t.register("A", Domain::AtMostOne), Err(CalculusError::DomainConflict { .. })));
    }

    #[test]
    fn quantity_cannot_sit_in_rhs() {
        let r = Bound::upper("mu", ev(&[("mu", rat(1, 1))]), Loss::Sharp);
        assert_eq!(r.unwrap_err(), CalculusError::QuantityInRhs(Symbol::new("mu")));
    }

    #[test]
    fn symbol_names_are_validated() {
        assert!(Symbol::parse("mass_rho").is_ok());
        assert!(Symbol::parse("2x").is_err());
        assert!(Symbol::parse("").is_err());
        assert!(serde_json::from_str::<Symbol>("\"a-b\"").is_err());
    }

    #[test]
    fn loss_order() {
        assert!(Loss::Sharp < Loss::PolyLog && Loss::PolyLog < Loss::EpsPower);
        let b = Bound::upper("mu", ev(&[]), Loss::EpsPower).unwrap();
        assert_eq!(b.widen_loss(Loss::PolyLog).loss(), Loss::EpsPower);
    }
}
