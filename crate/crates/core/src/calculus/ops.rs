// SPDX-License-Identifier: Apache-2.0

use super::{sym, Bound, CalculusError, Domain, ExponentVector, Relation, Symbol, SymbolTable};
use crate::scalar::Scalar;

fn same_kind<S: Scalar>(b1: &Bound<S>, b2: &Bound<S>) -> Result<(), CalculusError> {
    if b1.quantity() != b2.quantity() {
        return Err(CalculusError::QuantityMismatch { left: b1.quantity().clone(), right: b2.quantity().clone() });
    }
    if b1.relation() != b2.relation() {
        return Err(CalculusError::RelationMismatch);
    }
    Ok(())
}

fn check_weight<S: Scalar>(t: &S) -> Result<(), CalculusError> {
    if t.is_negative() || *t > S::one() {
        return Err(CalculusError::WeightOutOfRange { weight: t.to_string() });
    }
    Ok(())
}

/// `b1^t · b2^(1−t)`: the convex combination of exponent vectors.
pub fn interpolate<S: Scalar>(b1: &Bound<S>, b2: &Bound<S>, t: &S) -> Result<Bound<S>, CalculusError> {
    same_kind(b1, b2)?;
    check_weight(t)?;
    let rhs = b1.rhs().convex(b2.rhs(), t);
    let provenance = b1.provenance().iter().chain(b2.provenance()).cloned().collect();
    b1.with_parts(rhs, b1.loss().max(b2.loss()), provenance)
}

/// `Π bᵢ^{wᵢ}` for nonnegative weights summing to one.
pub fn interpolate_many<S: Scalar>(bounds: &[Bound<S>], weights: &[S]) -> Result<Bound<S>, CalculusError> {
    assert_eq!(bounds.len(), weights.len(), "one weight per bound");
    let first = bounds.first().expect("at least one bound");
    let mut sum = S::zero();
    for (b, w) in bounds.iter().zip(weights) {
        same_kind(first, b)?;
        check_weight(w)?;
        sum = sum + w.clone();
    }
    if sum != S::one() {
        return Err(CalculusError::WeightsNotConvex { sum: sum.to_string() });
    }
    let mut rhs = ExponentVector::new();
    let mut loss = first.loss();
    let mut provenance = Vec::new();
    for (b, w) in bounds.iter().zip(weights) {
        rhs = rhs.add(&b.rhs().scale(w));
        loss = loss.max(b.loss());
        provenance.extend(b.provenance().iter().cloned());
    }
    first.with_parts(rhs, loss, provenance)
}

/// The weight `t` with `t·e1 + (1−t)·e2 = target` for the exponents of `sym`.
pub fn solve_weight<S: Scalar>(b1: &Bound<S>, b2: &Bound<S>, sym: &Symbol, target: &S) -> Result<S, CalculusError> {
    same_kind(b1, b2)?;
    let (e1, e2) = (b1.rhs().get(sym), b2.rhs().get(sym));
    if e1 == e2 {
        if e2 == *target {
            return Ok(S::zero());
        }
        return Err(CalculusError::NoSolution { symbol: sym.clone(), exponent: e1.to_string(), target: target.to_string() });
    }
    let t = (target.clone() - e2.clone()) / (e1 - e2);
    check_weight(&t)?;
    Ok(t)
}

/// Interpolates so that `sym` disappears.
pub fn eliminate<S: Scalar>(b1: &Bound<S>, b2: &Bound<S>, sym: &Symbol) -> Result<(S, Bound<S>), CalculusError> {
    let t = solve_weight(b1, b2, sym, &S::zero())?;
    let out = interpolate(b1, b2, &t)?;
    debug_assert!(!out.rhs().contains(sym));
    Ok((t, out))
}

/// Substitutes `inner` for the factor `inner.quantity^e` of `outer`.
///
/// Sound when the substituted side moves the same way as `outer` needs:
/// an upper bound may feed a positive power of an upper bound or a negative
/// power of a lower bound, and mirror-wise for lower bounds.
pub fn compose<S: Scalar>(outer: &Bound<S>, inner: &Bound<S>) -> Result<Bound<S>, CalculusError> {
    let q = inner.quantity();
    let e = outer.rhs().get(q);
    if e.is_zero() {
        return Ok(outer.clone());
    }
    let aligned = outer.relation() == inner.relation();
    if aligned != e.is_positive() {
        let reason = if aligned {
            "a negative power would reverse the substituted inequality"
        } else {
            "a positive power of an opposite-direction bound would reverse the inequality"
        };
        return Err(CalculusError::DirectionUnsound { symbol: q.clone(), exponent: e.to_string(), reason: reason.into() });
    }
    let mut rhs = outer.rhs().clone();
    rhs.remove(q);
    let rhs = rhs.add(&inner.rhs().scale(&e));
    let provenance = outer.provenance().iter().chain(inner.provenance()).cloned().collect();
    outer.with_parts(rhs, outer.loss().max(inner.loss()), provenance)
}

/// Replaces `sym` by the monomial `replacement` everywhere.
///
/// When `sym` is the bounded quantity itself, the replacement must be a single
/// symbol to the first power and the quantity is renamed.
pub fn substitute_rescale<S: Scalar>(
    b: &Bound<S>,
    sym: &Symbol,
    replacement: &ExponentVector<S>,
    table: &SymbolTable,
) -> Result<Bound<S>, CalculusError> {
    table.require(sym)?;
    for s in replacement.symbols() {
        table.require(s)?;
    }
    if sym == b.quantity() {
        let mut it = replacement.iter();
        return match (it.next(), it.next()) {
            (Some((s, e)), None) if *e == S::one() => b.renamed(s.clone()),
            _ => Err(CalculusError::InvalidRename { quantity: b.quantity().clone() }),
        };
    }
    let mut rhs = b.rhs().clone();
    let e = rhs.remove(sym);
    if e.is_zero() {
        return Ok(b.clone());
    }
    let rhs = rhs.add(&replacement.scale(&e));
    b.with_parts(rhs, b.loss(), b.provenance().to_vec())
}

/// Moves the exponent of `sym` to `new_exponent` when that only weakens the bound.
pub fn relax<S: Scalar>(b: &Bound<S>, sym: &Symbol, new_exponent: &S, table: &SymbolTable) -> Result<Bound<S>, CalculusError> {
    let old = b.rhs().get(sym);
    if old == *new_exponent {
        return Ok(b.clone());
    }
    let domain = table.require(sym)?;
    // The bound is multiplied by sym^shift; that must not strengthen it.
    let shift = new_exponent.clone() - old.clone();
    let factor_at_least_one = match domain {
        Domain::AtMostOne => shift.is_negative(),
        Domain::AtLeastOne => shift.is_positive(),
        Domain::Free => {
            return Err(CalculusError::DirectionUnsound {
                symbol: sym.clone(),
                exponent: old.to_string(),
                reason: "free parameters have no sign to exploit".into(),
            })
        }
    };
    let ok = match b.relation() {
        Relation::Upper => factor_at_least_one,
        Relation::Lower => !factor_at_least_one,
    };
    if !ok {
        return Err(CalculusError::DirectionUnsound {
            symbol: sym.clone(),
            exponent: old.to_string(),
            reason: format!("moving it to {new_exponent} would strengthen a {domain:?} factor"),
        });
    }
    let mut rhs = b.rhs().clone();
    rhs.set(sym.clone(), new_exponent.clone());
    b.with_parts(rhs, b.loss(), b.provenance().to_vec())
}

/// Discards the factor `sym^e`, valid when it is ≳ 1 on an upper bound (≲ 1 on a lower).
pub fn drop_bounded<S: Scalar>(b: &Bound<S>, sym: &Symbol, table: &SymbolTable) -> Result<Bound<S>, CalculusError> {
    relax(b, sym, &S::zero(), table)
}

/// The symbols tied together by `volume = mu⁻¹ · lambda · mass`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingScale {
    pub volume: Symbol,
    pub mu: Symbol,
    pub lambda: Symbol,
    pub mass: Symbol,
}

impl CountingScale {
    /// Tubes of width δ: `mass = δ³#𝕋`.
    pub fn delta() -> Self {
        CountingScale {
            volume: Symbol::new(sym::VOLUME),
            mu: Symbol::new(sym::MU),
            lambda: Symbol::new(sym::LAMBDA),
            mass: Symbol::new(sym::MASS),
        }
    }

    /// Tubes of width ρ: `mass_rho = ρ³#𝕋_ρ`.
    pub fn rho() -> Self {
        CountingScale {
            volume: Symbol::new(sym::VOLUME_RHO),
            mu: Symbol::new(sym::MU_RHO),
            lambda: Symbol::new(sym::LAMBDA),
            mass: Symbol::new(sym::MASS_RHO),
        }
    }
}

/// Converts a lower bound on the volume into an upper bound on the multiplicity, and back.
pub fn double_count<S: Scalar>(b: &Bound<S>, scale: &CountingScale) -> Result<Bound<S>, CalculusError> {
    let (target, relation) = match (b.quantity(), b.relation()) {
        (q, Relation::Lower) if *q == scale.volume => (scale.mu.clone(), Relation::Upper),
        (q, Relation::Upper) if *q == scale.mu => (scale.volume.clone(), Relation::Lower),
        (q, r) => {
            return Err(CalculusError::WrongQuantity {
                expected: format!("{} from below or {} from above", scale.volume, scale.mu),
                found: format!("{q} {}", r.symbol()),
            })
        }
    };
    let counted = ExponentVector::from_pairs([(scale.lambda.as_str(), S::one()), (scale.mass.as_str(), S::one())]);
    let rhs = counted.add(&b.rhs().neg());
    let mut out = Bound::new(target, relation, rhs, b.loss())?;
    for p in b.provenance() {
        out = out.with_provenance(p.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Loss;
    use crate::rational::{rat, Rational};

    fn upper(q: &str, pairs: &[(&str, Rational)]) -> Bound {
        Bound::upper(q, ExponentVector::from_pairs(pairs.iter().cloned()), Loss::Sharp).unwrap()
    }

    fn lower(q: &str, pairs: &[(&str, Rational)]) -> Bound {
        Bound::lower(q, ExponentVector::from_pairs(pairs.iter().cloned()), Loss::Sharp).unwrap()
    }

    fn s(n: &str) -> Symbol {
        Symbol::new(n)
    }

    #[test]
    fn interpolate_planebrush_and_hairbrush() {
        let planebrush = upper("mu_rho", &[("lambda", rat(-1, 3)), ("rho", rat(-2, 3)), ("A", rat(1, 3)), ("D", rat(4, 3))]);
        let hairbrush =
            upper("mu_rho", &[("A", rat(1, 2)), ("lambda", rat(-3, 4)), ("rho", rat(-1, 1)), ("mass_rho", rat(1, 2))]);
        let out = interpolate(&planebrush, &hairbrush, &rat(3, 4)).unwrap();
        let expected = upper(
            "mu_rho",
            &[("lambda", rat(-7, 16)), ("rho", rat(-3, 4)), ("A", rat(3, 8)), ("mass_rho", rat(1, 8)), ("D", rat(1, 1))],
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn interpolate_identity_and_range() {
        let a = upper("mu", &[("lambda", rat(-1, 1))]);
        let b = upper("mu", &[("delta", rat(-1, 1))]);
        assert_eq!(interpolate(&a, &b, &rat(1, 1)).unwrap(), a);
        assert!(matches!(interpolate(&a, &b, &rat(5, 4)), Err(CalculusError::WeightOutOfRange { .. })));
        assert!(matches!(interpolate(&a, &b, &rat(-1, 4)), Err(CalculusError::WeightOutOfRange { .. })));
        let c = lower("mu", &[]);
        assert_eq!(interpolate(&a, &c, &rat(1, 2)), Err(CalculusError::RelationMismatch));
        let d = upper("volume", &[]);
        assert!(matches!(interpolate(&a, &d, &rat(1, 2)), Err(CalculusError::QuantityMismatch { .. })));
    }

    #[test]
    fn interpolate_theta_lambda_exponent() {
        let eq1 = upper("mu", &[("lambda", rat(-19, 16)), ("rho", rat(1, 4)), ("delta", rat(-1, 1)), ("mass", rat(1, 8))]);
        let eq2 = upper("mu", &[("lambda", rat(-3, 4)), ("delta", rat(-1, 1)), ("A", rat(-1, 2))]);
        let out = interpolate(&eq1, &eq2, &rat(8, 23)).unwrap();
        assert_eq!(out.exponent("lambda"), rat(-83, 92));
        assert_eq!(out.exponent("lambda"), rat(-7, 46) + rat(-3, 4));
        assert_eq!(out.exponent("rho"), rat(2, 23));
        assert_eq!(out.exponent("mass"), rat(1, 23));
        assert_eq!(out.exponent("A"), rat(-15, 46));
    }

    #[test]
    fn solve_weight_cases() {
        let theta = upper("mu", &[("rho", rat(2, 23))]);
        let gz = upper("mu", &[("rho", rat(-1, 1))]);
        assert_eq!(solve_weight(&theta, &gz, &s("rho"), &rat(0, 1)).unwrap(), rat(23, 25));
        assert_eq!(solve_weight(&theta, &gz, &s("rho"), &rat(-1, 1)).unwrap(), rat(0, 1));
        assert!(matches!(
            solve_weight(&theta, &gz, &s("rho"), &rat(1, 1)),
            Err(CalculusError::WeightOutOfRange { .. })
        ));
        let flat = upper("mu", &[("lambda", rat(1, 1))]);
        assert!(matches!(solve_weight(&flat, &flat, &s("lambda"), &rat(2, 1)), Err(CalculusError::NoSolution { .. })));
        let (t, out) = eliminate(&flat, &flat, &s("rho")).unwrap();
        assert_eq!((t, out), (rat(0, 1), flat.clone()));
    }

    #[test]
    fn eliminate_removes_symbol() {
        let theta = upper(
            "mu",
            &[("lambda", rat(-83, 92)), ("rho", rat(2, 23)), ("delta", rat(-1, 1)), ("mass", rat(1, 23))],
        );
        let gz = upper("mu", &[("lambda", rat(-9, 4)), ("rho", rat(-1, 1)), ("delta", rat(-3, 4)), ("mass", rat(3, 4))]);
        let (t, out) = eliminate(&theta, &gz, &s("rho")).unwrap();
        assert_eq!(t, rat(23, 25));
        assert_eq!(out, upper("mu", &[("lambda", rat(-101, 100)), ("delta", rat(-49, 50)), ("mass", rat(1, 10))]));
    }

    #[test]
    fn compose_rules() {
        let outer = upper("mu", &[("mu_tilde", rat(1, 1)), ("rho", rat(-1, 1))]);
        let inner = upper("mu_tilde", &[("lambda", rat(-3, 4)), ("delta", rat(-1, 1)), ("rho", rat(1, 1))]);
        let out = compose(&outer, &inner).unwrap();
        assert_eq!(out, upper("mu", &[("lambda", rat(-3, 4)), ("delta", rat(-1, 1))]));

        let absent = upper("mass", &[]);
        assert_eq!(compose(&outer, &absent).unwrap(), outer);

        let neg = upper("mu", &[("mu_tilde", rat(-1, 1))]);
        assert!(matches!(compose(&neg, &inner), Err(CalculusError::DirectionUnsound { .. })));
        let low = lower("mu_tilde", &[("lambda", rat(1, 1))]);
        assert!(matches!(compose(&outer, &low), Err(CalculusError::DirectionUnsound { .. })));
        assert!(compose(&neg, &low).is_ok());
    }

    #[test]
    fn compose_rejects_self_reference() {
        let outer = upper("mu", &[("x", rat(1, 1))]);
        let inner = upper("x", &[("mu", rat(1, 1))]);
        assert_eq!(compose(&outer, &inner), Err(CalculusError::QuantityInRhs(s("mu"))));
    }

    #[test]
    fn substitute_rescale_tilde() {
        let t = SymbolTable::standard();
        let hair = upper("mu", &[("m", rat(1, 2)), ("lambda", rat(-3, 4)), ("delta", rat(-1, 1)), ("mass", rat(1, 2))]);
        let b = substitute_rescale(&hair, &s("delta"), &ExponentVector::from_pairs([("delta", rat(1, 1)), ("rho", rat(-1, 1))]), &t).unwrap();
        let b = substitute_rescale(&b, &s("mass"), &ExponentVector::single(s("mass_ratio"), rat(1, 1)), &t).unwrap();
        let b = substitute_rescale(&b, &s("m"), &ExponentVector::new(), &t).unwrap();
        let b = substitute_rescale(&b, &s("mu"), &ExponentVector::single(s("mu_tilde"), rat(1, 1)), &t).unwrap();
        assert_eq!(
            b,
            upper("mu_tilde", &[("lambda", rat(-3, 4)), ("delta", rat(-1, 1)), ("rho", rat(1, 1)), ("mass_ratio", rat(1, 2))])
        );
        let same = substitute_rescale(&hair, &s("lambda"), &ExponentVector::single(s("lambda"), rat(1, 1)), &t).unwrap();
        assert_eq!(same, hair);
        assert!(matches!(
            substitute_rescale(&hair, &s("zeta"), &ExponentVector::new(), &t),
            Err(CalculusError::UnknownSymbol(_))
        ));
        assert!(matches!(
            substitute_rescale(&hair, &s("mu"), &ExponentVector::single(s("mu_tilde"), rat(2, 1)), &t),
            Err(CalculusError::InvalidRename { .. })
        ));
    }

    #[test]
    fn drop_bounded_rules() {
        let t = SymbolTable::standard();
        let b = upper("mu", &[("A", rat(-15, 46)), ("lambda", rat(-1, 1)), ("h", rat(-101, 150))]);
        let out = drop_bounded(&b, &s("A"), &t).unwrap();
        assert!(!out.rhs().contains(&s("A")));
        let out = drop_bounded(&out, &s("h"), &t).unwrap();
        assert_eq!(out, upper("mu", &[("lambda", rat(-1, 1))]));
        assert_eq!(drop_bounded(&out, &s("delta"), &t).unwrap(), out);
        assert!(matches!(drop_bounded(&b, &s("lambda"), &t), Err(CalculusError::DirectionUnsound { .. })));
        let l = lower("volume", &[("lambda", rat(-1, 1)), ("m", rat(1, 1))]);
        assert!(drop_bounded(&l, &s("lambda"), &t).is_ok());
        assert!(drop_bounded(&l, &s("m"), &t).is_ok());
        let l2 = lower("volume", &[("lambda", rat(2, 1))]);
        assert!(drop_bounded(&l2, &s("lambda"), &t).is_err());
        let free = upper("mu", &[("integral", rat(1, 1))]);
        assert!(drop_bounded(&free, &s("integral"), &t).is_err());
    }

    #[test]
    fn relax_promotes_lower_bound() {
        let t = SymbolTable::standard();
        let te = lower("volume", &[("lambda", rat(2, 1)), ("delta", rat(1, 1)), ("mass", rat(1, 2))]);
        let out = relax(&te, &s("lambda"), &rat(65, 28), &t).unwrap();
        let out = relax(&out, &s("mass"), &rat(2, 3), &t).unwrap();
        assert_eq!(out.exponent("lambda"), rat(65, 28));
        assert!(relax(&out, &s("mass"), &rat(1, 3), &t).is_err());
    }

    #[test]
    fn double_count_examples() {
        let scale = CountingScale::delta();
        let tri = lower("volume", &[("lambda", rat(13, 4)), ("delta", rat(3, 4)), ("rho", rat(1, 1)), ("mass", rat(1, 4))]);
        let gz = double_count(&tri, &scale).unwrap();
        assert_eq!(gz, upper("mu", &[("lambda", rat(-9, 4)), ("rho", rat(-1, 1)), ("delta", rat(-3, 4)), ("mass", rat(3, 4))]));
        assert_eq!(double_count(&gz, &scale).unwrap(), tri);

        let single = lower("volume", &[("lambda", rat(1, 1)), ("mass", rat(1, 1))]);
        assert_eq!(double_count(&single, &scale).unwrap(), upper("mu", &[]));

        let te = lower("volume", &[("lambda", rat(2, 1)), ("delta", rat(1, 1)), ("mass", rat(1, 2))]);
        let mu = double_count(&te, &scale).unwrap();
        assert_eq!(mu, upper("mu", &[("lambda", rat(-1, 1)), ("delta", rat(-1, 1)), ("mass", rat(1, 2))]));
        // cross-check with the hairbrush μ at m = 1: λ^{-1} ≥ λ^{-3/4} for λ ≤ 1, so this is the weaker form
        let hair = upper("mu", &[("lambda", rat(-3, 4)), ("delta", rat(-1, 1)), ("mass", rat(1, 2))]);
        let t = SymbolTable::standard();
        assert_eq!(relax(&hair, &s("lambda"), &rat(-1, 1), &t).unwrap(), mu);

        assert!(matches!(double_count(&upper("volume", &[]), &scale), Err(CalculusError::WrongQuantity { .. })));
    }

    #[test]
    fn interpolate_many_matches_nested() {
        let a = upper("mu", &[("lambda", rat(1, 1))]);
        let b = upper("mu", &[("delta", rat(1, 1))]);
        let c = upper("mu", &[("rho", rat(1, 1))]);
        let nested = interpolate(&interpolate(&a, &b, &rat(1, 3)).unwrap(), &c, &rat(3, 4)).unwrap();
        let flat = interpolate_many(&[a.clone(), b.clone(), c.clone()], &[rat(1, 4), rat(1, 2), rat(1, 4)]).unwrap();
        assert_eq!(nested, flat);
        assert!(matches!(
            interpolate_many(&[a, b], &[rat(1, 2), rat(1, 3)]),
            Err(CalculusError::WeightsNotConvex { .. })
        ));
    }
}
