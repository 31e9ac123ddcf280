// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use kakeya_core::algebraic::{alpha_star, IterateOptions, Monotonicity, Polynomial, QuadraticNumber, RationalMap, Rounding};
use kakeya_core::calculus::{
    compose, double_count, eliminate, interpolate, interpolate_many, relax, substitute_rescale, Bound, CountingScale,
    ExponentVector, Loss, Relation, Symbol, SymbolTable,
};
use kakeya_core::derivation::derive_self_improve;
use kakeya_core::{rat, Rational, Scalar};
use num_bigint::BigInt;
use proptest::prelude::*;

const PARAMS: [&str; 8] = ["lambda", "delta", "rho", "mass", "A", "m", "D", "R"];

fn small_rat() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn unit_weight() -> impl Strategy<Value = Rational> {
    (0i64..=24).prop_map(|n| rat(n, 24))
}

fn rhs() -> impl Strategy<Value = ExponentVector> {
    proptest::collection::vec(small_rat(), PARAMS.len())
        .prop_map(|es| ExponentVector::from_pairs(PARAMS.iter().zip(es).map(|(s, e)| (*s, e))))
}

fn loss() -> impl Strategy<Value = Loss> {
    prop_oneof![Just(Loss::Sharp), Just(Loss::PolyLog), Just(Loss::EpsPower)]
}

fn mu_bound() -> impl Strategy<Value = Bound> {
    (rhs(), loss()).prop_map(|(r, l)| Bound::upper("mu", r, l).unwrap())
}

/// Plain multiply-out of `outer` with `inner` substituted, written without the calculus helpers.
fn naive_compose(outer: &Bound, inner: &Bound) -> Vec<(String, Rational)> {
    let k = outer.exponent(inner.quantity().as_str());
    let mut names: Vec<String> = outer.rhs().symbols().chain(inner.rhs().symbols()).map(|s| s.to_string()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .filter(|n| n != inner.quantity().as_str())
        .map(|n| {
            let e = outer.exponent(&n) + k.clone() * inner.exponent(&n);
            (n, e)
        })
        .filter(|(_, e)| !e.is_zero())
        .collect()
}

fn collected(b: &Bound) -> Vec<(String, Rational)> {
    b.rhs().iter().map(|(s, e)| (s.to_string(), e.clone())).collect()
}

/// `a + b·√d` to 100 decimal digits with a separate integer square root.
fn decimal_100(x: &QuadraticNumber) -> BigInt {
    let scale = BigInt::from(10u32).pow(100);
    let root = (x.radicand() * &scale * &scale).sqrt();
    let a = x.rational_part();
    let b = x.surd_coefficient();
    let num = a.numer() * &scale * b.denom() + b.numer() * &root * a.denom();
    num / (a.denom() * b.denom())
}

fn quad(d: u32) -> impl Strategy<Value = QuadraticNumber> {
    (small_rat(), small_rat()).prop_map(move |(a, b)| QuadraticNumber::new(a, b, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn interpolation_is_associative(b1 in mu_bound(), b2 in mu_bound(), b3 in mu_bound(), s in unit_weight(), t in unit_weight()) {
        let nested = interpolate(&interpolate(&b1, &b2, &s).unwrap(), &b3, &t).unwrap();
        let one = Rational::one();
        let flat = interpolate_many(
            &[b1, b2, b3],
            &[t.clone() * s.clone(), t.clone() * (one.clone() - s), one - t],
        ).unwrap();
        prop_assert_eq!(nested.statement(), flat.statement());
    }

    #[test]
    fn elimination_zeroes_the_symbol(b1 in mu_bound(), b2 in mu_bound(), i in 0usize..PARAMS.len()) {
        let sym = Symbol::new(PARAMS[i]);
        let (e1, e2) = (b1.rhs().get(&sym), b2.rhs().get(&sym));
        match eliminate(&b1, &b2, &sym) {
            Ok((w, out)) => {
                prop_assert!(out.rhs().get(&sym).is_zero());
                prop_assert!(!w.is_negative() && w <= Rational::one());
            }
            Err(_) => prop_assert!(!(e1.is_negative() && e2.is_positive() || e1.is_positive() && e2.is_negative())),
        }
    }

    #[test]
    fn compose_matches_multiply_out(outer in mu_bound(), inner_rhs in rhs(), k in 1i64..20) {
        // outer carries a positive mass power so an upper bound on mass may be plugged in
        let mut r = outer.rhs().clone();
        r.set(Symbol::new("mass"), rat(k, 7));
        let outer = Bound::upper("mu", r, outer.loss()).unwrap();
        let mut ir = inner_rhs;
        ir.remove(&Symbol::new("mass"));
        let inner = Bound::upper("mass", ir, Loss::Sharp).unwrap();
        let out = compose(&outer, &inner).unwrap();
        prop_assert_eq!(collected(&out), naive_compose(&outer, &inner));
        prop_assert_eq!(out.relation(), Relation::Upper);
        prop_assert_eq!(out.quantity().as_str(), "mu");
    }

    #[test]
    fn double_count_is_an_involution(r in rhs(), l in loss()) {
        let scale = CountingScale::delta();
        let vol = Bound::lower("volume", r, l).unwrap();
        let mu = double_count(&vol, &scale).unwrap();
        prop_assert_eq!(mu.relation(), Relation::Upper);
        prop_assert_eq!(double_count(&mu, &scale).unwrap().statement(), vol.statement());
    }

    #[test]
    fn direction_preserved(b in mu_bound(), c in mu_bound(), t in unit_weight(), e in small_rat()) {
        let table = SymbolTable::standard();
        prop_assert_eq!(interpolate(&b, &c, &t).unwrap().relation(), Relation::Upper);
        let sub = substitute_rescale(&b, &Symbol::new("delta"), &ExponentVector::from_pairs([("R", rat(-1, 2))]), &table).unwrap();
        prop_assert_eq!(sub.relation(), Relation::Upper);
        if let Ok(r) = relax(&b, &Symbol::new("lambda"), &e, &table) {
            prop_assert_eq!(r.relation(), Relation::Upper);
            // upper bound in λ ≤ 1: only lowering the λ power is sound
            prop_assert!(e <= b.exponent("lambda"));
        }
    }

    #[test]
    fn text_and_json_round_trip(b in mu_bound()) {
        let parsed: Bound = b.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &b.statement());
        let json = serde_json::to_string(&b).unwrap();
        prop_assert_eq!(serde_json::from_str::<Bound>(&json).unwrap(), b);
    }

    #[test]
    fn quadratic_trichotomy(x in quad(145), y in quad(145)) {
        let lt = x < y;
        let eq = x == y;
        let gt = x > y;
        prop_assert_eq!(lt as u8 + eq as u8 + gt as u8, 1);
        let (dx, dy) = (decimal_100(&x), decimal_100(&y));
        // the 100-digit truncations can only tie when the values are within 10^-100
        match x.cmp(&y) {
            Ordering::Less => prop_assert!(dx <= dy),
            Ordering::Greater => prop_assert!(dx >= dy),
            Ordering::Equal => prop_assert_eq!(dx, dy),
        }
    }

    #[test]
    fn field_axioms(x in quad(5), y in quad(5)) {
        let zero = QuadraticNumber::from(Rational::zero());
        let one = QuadraticNumber::from(Rational::one());
        prop_assert_eq!(x.clone() + zero, x.clone());
        prop_assert_eq!(x.clone() * one, x.clone());
        if !Scalar::is_zero(&y) {
            prop_assert_eq!((x.clone() / y.clone()) * y.clone(), x);
        }
    }

    #[test]
    fn fixed_points_are_fixed(n in proptest::collection::vec(-9i64..=9, 3), d in proptest::collection::vec(-9i64..=9, 2)) {
        if let Ok(map) = RationalMap::new(Polynomial::from_ints(&n), Polynomial::from_ints(&d)) {
            if let Ok(fp) = map.fixed_points() {
                for r in &fp.roots {
                    prop_assert_eq!(map.eval(r), Some(r.clone()));
                }
            }
        }
    }

    #[test]
    fn iteration_stays_in_window(num in 0i64..=1000) {
        // x0 in [0.972, 1] ⊂ [α*, 1]
        let x0 = rat(972_000 + 28 * num, 1_000_000);
        let opts = IterateOptions { max_iter: 25, rounding: Rounding::Up { bits: 64 }, ..IterateOptions::default() };
        let traj = RationalMap::alpha_prime().iterate(&x0, &opts).unwrap();
        let star = alpha_star();
        for x in &traj.iterates {
            prop_assert!(star.cmp_rational(x) == Ordering::Less);
            prop_assert!(x <= &Rational::one());
        }
        prop_assert!(matches!(
            traj.monotonicity,
            Monotonicity::StrictlyDecreasing | Monotonicity::NonIncreasing | Monotonicity::Constant
        ));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    /// Bound-level α′, α″ agree with the closed-form maps on [α*, 1].
    #[test]
    fn bound_level_matches_closed_forms(n in 0i64..=100_000) {
        let alpha = rat(97_189 + n * 281 / 1000, 100_000).min(Rational::one());
        let s = derive_self_improve(alpha.clone(), rat(65, 28)).unwrap();
        let closed_pp = rat(45, 28) - rat(9, 14) / alpha.clone();
        let two = rat(2, 1);
        let closed_p = Rational::one() - (rat(18, 1) - rat(17, 1) * alpha.clone()) * (rat(3, 1) - two.clone() * alpha.clone())
            / (rat(54, 1) * (two - alpha.clone()));
        prop_assert_eq!(&s.alpha_double_prime, &closed_pp);
        prop_assert_eq!(&s.alpha_prime, &closed_p);
        prop_assert_eq!(s.alpha_prime_bound.exponent("mass"), alpha / rat(3, 1));
    }
}
