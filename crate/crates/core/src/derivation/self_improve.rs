// SPDX-License-Identifier: Apache-2.0

//! The self-improving step for a priori incidence estimates and its iteration.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::incidence::{mass_rho_identity, plany_front};
use super::te::volume_form;
use super::{base_bounds, mono, q, Anchor, Builder, Derivation, DerivationError, Outcome, Scale, TEStatement};
use crate::algebraic::{alpha_star, d0, Polynomial, QuadraticNumber, RationalMap};
use crate::calculus::{Bound, ExponentVector, Loss};
use crate::rational::{rat, Rational};
use crate::scalar::Scalar;

const STEP: &str = "self-improving step";
const ITER: &str = "iterated incidence estimate";

/// Validity checks read off the two final bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// λ power of the α″-bound is at least α″ − 3.
    pub condition_i: bool,
    /// mass power of the α″-bound is nonnegative.
    pub mass_nonnegative: bool,
    /// λ power of the α′-bound is at least 1 − β.
    pub condition_ii: bool,
    /// mass power of the α′-bound equals α/3.
    pub mass_matches: bool,
}

impl Flags {
    pub fn all(&self) -> bool {
        self.condition_i && self.mass_nonnegative && self.condition_ii && self.mass_matches
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct SelfImprove<S: Scalar = Rational> {
    pub derivation: Derivation<S>,
    pub alpha: S,
    pub beta: S,
    pub alpha_prime: S,
    pub alpha_double_prime: S,
    /// Weight on the first route when `A` is eliminated (2α/3).
    pub theta_weight: S,
    /// Weight on the combined bound when ρ is eliminated (6/(7α)).
    pub rho_weight: S,
    /// Weight on the α″-bound when matching the mass power to α/3.
    pub match_weight: S,
    pub alpha_double_prime_bound: Bound<S>,
    pub alpha_prime_bound: Bound<S>,
    pub flags: Flags,
    /// `TE(4 − α′, β, 1 − α/3)` when condition (ii) holds.
    pub te_prime: Option<Bound<S>>,
    /// `TE(4 − α″, 4 − α″, 1)` when condition (i) and the mass check hold.
    pub te_double_prime: Option<Bound<S>>,
}

struct Chain<S: Scalar> {
    theta_weight: S,
    rho_weight: S,
    match_weight: S,
    app: Bound<S>,
    ap: Bound<S>,
    flags: Flags,
    te_prime: Option<Bound<S>>,
    te_double_prime: Option<Bound<S>>,
}

fn te_bound<S: Scalar>(d: S, a: S, b: S) -> Bound<S> {
    volume_form(&d, &a, &b).expect("volume form")
}

/// Runs the step on the hypothesis `hyp`, which must be `TE(4 − α, β, 1 − α/3)`.
fn chain<S: Scalar>(b: &mut Builder<'_, S>, hyp: &str, alpha: &S, beta: &S) -> Result<Chain<S>, DerivationError> {
    let one = S::one;
    let third = alpha.clone() / q::<S>(3, 1);
    b.expect(hyp, "hypothesis", &te_bound(q::<S>(4, 1) - alpha.clone(), beta.clone(), one() - third.clone()))?;
    b.double_count("mu_hyp", hyp, Scale::Delta, Anchor::new(STEP, "mu <=~ lambda^(1-beta) * delta^-alpha * mass^(alpha/3)"))?;
    b.substitute(
        "fine",
        "mu_hyp",
        vec![
            ("delta", mono(&[("delta", one()), ("rho", -one())])),
            ("mass", mono(&[("mass_ratio", one())])),
            ("mu", mono(&[("mu_tilde", one())])),
        ],
        Anchor::new(STEP, "hypothesis at scale delta/rho inside one rho-tube"),
    )?;

    plany_front(b)?;
    b.compose("route1_fine", "relation", "fine", Anchor::new(STEP, "substitute the fine-scale bound for mu_tilde"))?;
    b.substitute("route1_mass", "route1_fine", vec![("mass_rho", mass_rho_identity())], Anchor::plumbing())?;
    b.axiom("mass_ratio")?;
    b.compose(
        "route1",
        "route1_mass",
        "mass_ratio",
        Anchor::new(STEP, "mu <=~ lambda^(9/16-beta) * rho^(alpha-3/4) * delta^-alpha * A^(1/2-alpha/3) * mass^1/8"),
    )?;
    b.axiom("dich_ix")?;
    b.compose("route2_fine", "dich_ix", "fine", Anchor::new(STEP, "mu <=~ rho^-1 * mu_tilde"))?;
    b.compose("route2", "route2_fine", "mass_ratio", Anchor::new(STEP, "mu <=~ lambda^(1-beta) * rho^(alpha-1) * delta^-alpha * A^(-alpha/3)"))?;
    let theta_weight = b.eliminate("theta", "route1", "route2", "A", Anchor::new(STEP, "route1^(2alpha/3) * route2^(1-2alpha/3)"))?;

    b.axiom("gz")?;
    let rho_weight =
        b.eliminate("alpha_pp_bound", "theta", "gz", "rho", Anchor::new(STEP, "combined^(6/(7alpha)) * trilinear^(1-6/(7alpha))"))?;
    b.substitute(
        "ww",
        "hairbrush",
        vec![("m", ExponentVector::new())],
        Anchor::new(STEP, "two-ends hairbrush bound mu <=~ lambda^-3/4 * delta^-1 * mass^1/2"),
    )?;
    let match_weight = b.match_exponent(
        "alpha_p_bound",
        "alpha_pp_bound",
        "ww",
        "mass",
        third.clone(),
        Anchor::new(STEP, "weight chosen so the mass power is alpha/3"),
    )?;

    let app = b.get("alpha_pp_bound").clone();
    let ap = b.get("alpha_p_bound").clone();
    let alpha_pp = -app.exponent("delta");
    let four = q::<S>(4, 1);
    let flags = Flags {
        condition_i: app.exponent("lambda") >= alpha_pp.clone() - q::<S>(3, 1),
        mass_nonnegative: !app.exponent("mass").is_negative(),
        condition_ii: ap.exponent("lambda") >= one() - beta.clone(),
        mass_matches: ap.exponent("mass") == third,
    };

    let te_double_prime = if flags.condition_i && flags.mass_nonnegative {
        let d = four.clone() - alpha_pp;
        b.double_count("te_pp_volume", "alpha_pp_bound", Scale::Delta, Anchor::new(STEP, "volume = mu^-1 * lambda * mass"))?;
        b.relax("te_pp_lambda", "te_pp_volume", "lambda", d.clone(), Anchor::new(STEP, "lambda power up to 4 - alpha''"))?;
        b.relax("te_double_prime", "te_pp_lambda", "mass", one(), Anchor::new(STEP, "mass power up to 1"))?;
        b.expect("te_double_prime", "TE(4-alpha'', 4-alpha'', 1)", &te_bound(d.clone(), d, one()))?;
        Some(b.get("te_double_prime").clone())
    } else {
        None
    };
    let te_prime = if flags.condition_ii && flags.mass_matches {
        let d = four - (-ap.exponent("delta"));
        b.double_count("te_p_volume", "alpha_p_bound", Scale::Delta, Anchor::new(STEP, "volume = mu^-1 * lambda * mass"))?;
        b.relax("te_prime", "te_p_volume", "lambda", beta.clone(), Anchor::new(STEP, "lambda power up to beta"))?;
        b.expect("te_prime", "TE(4-alpha', beta, 1-alpha/3)", &te_bound(d, beta.clone(), one() - third))?;
        Some(b.get("te_prime").clone())
    } else {
        None
    };
    Ok(Chain { theta_weight, rho_weight, match_weight, app, ap, flags, te_prime, te_double_prime })
}

fn cross_check<S: Scalar>(label: &str, step: &str, found: &S, expected: Option<S>) -> Result<(), DerivationError> {
    match expected {
        Some(e) if &e == found => Ok(()),
        e => Err(DerivationError::Mismatch {
            step: step.into(),
            label: label.into(),
            symbol: "delta".into(),
            expected: e.map_or("undefined".into(), |v| v.to_string()),
            found: found.to_string(),
        }),
    }
}

/// Replays the self-improving step at (α, β) and cross-checks it against the closed forms.
pub fn derive_self_improve<S: Scalar>(alpha: S, beta: S) -> Result<SelfImprove<S>, DerivationError> {
    if !alpha.is_positive() || alpha > S::one() {
        return Err(DerivationError::Domain(format!("alpha = {alpha} is outside (0, 1]")));
    }
    if !beta.is_positive() {
        return Err(DerivationError::Domain(format!("beta = {beta} is not positive")));
    }
    let reg = base_bounds();
    let mut b: Builder<S> = Builder::new(&reg);
    let third = alpha.clone() / q::<S>(3, 1);
    b.hypothesis(
        "te_hyp",
        q::<S>(4, 1) - alpha.clone(),
        beta.clone(),
        S::one() - third,
        Anchor::new(STEP, "TE(4-alpha, beta, 1-alpha/3)"),
    )?;
    let c = chain(&mut b, "te_hyp", &alpha, &beta)?;
    let alpha_prime = -c.ap.exponent("delta");
    let alpha_double_prime = -c.app.exponent("delta");
    cross_check("closed form of alpha'", "alpha_p_bound", &alpha_prime, RationalMap::alpha_prime().eval(&alpha))?;
    cross_check("closed form of alpha''", "alpha_pp_bound", &alpha_double_prime, RationalMap::alpha_double_prime().eval(&alpha))?;
    // t = 14α(3 − 2α) / (27(2 − α))
    let t = q::<S>(14, 1) * alpha.clone() * (q::<S>(3, 1) - q::<S>(2, 1) * alpha.clone())
        / (q::<S>(27, 1) * (q::<S>(2, 1) - alpha.clone()));
    cross_check("interpolation weight", "alpha_p_bound", &c.match_weight, Some(t))?;
    let derivation = b.finish("self-improve", Outcome::Scalar(alpha_prime.clone()));
    Ok(SelfImprove {
        derivation,
        alpha,
        beta,
        alpha_prime,
        alpha_double_prime,
        theta_weight: c.theta_weight,
        rho_weight: c.rho_weight,
        match_weight: c.match_weight,
        alpha_double_prime_bound: c.app,
        alpha_prime_bound: c.ap,
        flags: c.flags,
        te_prime: c.te_prime,
        te_double_prime: c.te_double_prime,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// The cleared-denominator polynomial in α.
    pub polynomial: String,
    pub holds: bool,
    /// Least value of the polynomial on the range.
    pub min: QuadraticNumber,
    pub argmin: QuadraticNumber,
    /// A point where the condition fails, if any.
    pub witness: Option<QuadraticNumber>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaWindowReport {
    pub beta: Rational,
    pub lo: QuadraticNumber,
    pub hi: QuadraticNumber,
    /// `96 − 24β − 31α ≥ 0`: the λ power of the α″-bound reaches α″ − 3.
    pub condition_i: ConditionReport,
    /// `196α² − (12β + 417)α + 72β + 90 ≥ 0`: the λ power of the α′-bound reaches 1 − β.
    pub condition_ii: ConditionReport,
    /// Largest β allowed by (i) at α = hi.
    pub beta_max_at_hi: QuadraticNumber,
    /// Smallest β allowed by (ii) at α = hi.
    pub beta_min_at_hi: QuadraticNumber,
}

impl BetaWindowReport {
    pub fn holds(&self) -> bool {
        self.condition_i.holds && self.condition_ii.holds
    }
}

fn condition_i_poly(beta: &Rational) -> Polynomial {
    Polynomial::new(vec![rat(96, 1) - rat(24, 1) * beta.clone(), rat(-31, 1)])
}

fn condition_ii_poly(beta: &Rational) -> Polynomial {
    Polynomial::new(vec![rat(72, 1) * beta.clone() + rat(90, 1), -(rat(12, 1) * beta.clone() + rat(417, 1)), rat(196, 1)])
}

/// Minimum of a polynomial of degree ≤ 2 over [lo, hi]: endpoints plus an interior vertex.
fn condition(p: Polynomial, lo: &QuadraticNumber, hi: &QuadraticNumber) -> Result<ConditionReport, DerivationError> {
    let mut points = vec![lo.clone(), hi.clone()];
    if p.degree() == 2 {
        let vertex = -p.coeff(1) / (rat(2, 1) * p.coeff(2));
        if lo.cmp_rational(&vertex) != Ordering::Greater && hi.cmp_rational(&vertex) != Ordering::Less {
            points.push(vertex.into());
        }
    }
    let field = |e: crate::algebraic::FieldError| DerivationError::Domain(e.to_string());
    let mut best: Option<(QuadraticNumber, QuadraticNumber)> = None;
    for x in points {
        let v = p.eval(&x);
        let better = match &best {
            None => true,
            Some((m, _)) => v.checked_cmp(m).map_err(field)? == Ordering::Less,
        };
        if better {
            best = Some((v, x));
        }
    }
    let (min, argmin) = best.expect("at least two points");
    let holds = min.signum() != Ordering::Less;
    Ok(ConditionReport {
        polynomial: p.to_string(),
        holds,
        witness: (!holds).then(|| argmin.clone()),
        min,
        argmin,
    })
}

/// Exact sign analysis of both β-window conditions for α in [lo, hi].
pub fn check_beta_window(lo: &QuadraticNumber, hi: &QuadraticNumber, beta: &Rational) -> Result<BetaWindowReport, DerivationError> {
    let field = |e: crate::algebraic::FieldError| DerivationError::Domain(e.to_string());
    let star = alpha_star();
    let inside = |x: &QuadraticNumber| -> Result<bool, DerivationError> {
        Ok(x.checked_cmp(&star).map_err(field)? != Ordering::Less && x.cmp_rational(&Rational::one()) != Ordering::Greater)
    };
    if !inside(lo)? || !inside(hi)? || lo.checked_cmp(hi).map_err(field)? == Ordering::Greater {
        return Err(DerivationError::Domain(format!("range [{lo}, {hi}] is not inside [alpha*, 1]")));
    }
    let c1 = condition(condition_i_poly(beta), lo, hi)?;
    let c2 = condition(condition_ii_poly(beta), lo, hi)?;
    let h = hi.clone();
    let r = |n: i64| QuadraticNumber::from(rat(n, 1));
    let beta_max_at_hi = (r(96) - r(31) * h.clone()) / r(24);
    let beta_min_at_hi = -(r(196) * h.clone() * h.clone() - r(417) * h.clone() + r(90)) / (r(72) - r(12) * h);
    Ok(BetaWindowReport {
        beta: beta.clone(),
        lo: lo.clone(),
        hi: hi.clone(),
        condition_i: c1,
        condition_ii: c2,
        beta_max_at_hi,
        beta_min_at_hi,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStep {
    pub k: usize,
    pub alpha: Rational,
    pub alpha_prime: Rational,
    /// The next iterate: `alpha_prime`, or a dyadic just above it.
    pub alpha_next: Rational,
    pub alpha_double_prime: Rational,
    pub flags: Flags,
    pub rounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationOutcome {
    /// Number of iterates α₁, …, α_K.
    pub k: usize,
    pub alpha_k: Rational,
    pub trajectory: Vec<Rational>,
    pub steps: Vec<IterationStep>,
    pub derivation: Derivation,
    /// `TE(4 − α* − ε, 65/28, 1 − α*/3)` and `TE(d₀ − ε, d₀ − ε, 1)`.
    pub te_statements: Vec<TEStatement>,
    pub d0: QuadraticNumber,
    pub alpha_star: QuadraticNumber,
    /// The β-window over all of [α*, 1]; the trajectory itself is checked step by step.
    pub window_interval: BetaWindowReport,
}

/// Iterates keep their exact value until they outgrow this many bits, then get rounded up.
const EXACT_BITS: u64 = 64;

/// Smallest dyadic at or above `exact` that stays strictly below `prev`.
fn round_up(exact: &Rational, prev: &Rational, bits: u32) -> Rational {
    if exact.height_bits() <= EXACT_BITS {
        return exact.clone();
    }
    let mut b = bits;
    loop {
        let r = exact.ceil_dyadic(b);
        if &r < prev || b >= 1 << 20 {
            return if &r < prev { r } else { exact.clone() };
        }
        b *= 2;
    }
}

/// Iterates the self-improving step from the hairbrush estimate until α_K < α* + eps.
pub fn iterate_self_improvement(eps: &Rational) -> Result<IterationOutcome, DerivationError> {
    if !eps.is_positive() {
        return Err(DerivationError::Domain("eps must be positive".into()));
    }
    let beta = rat(65, 28);
    let star = alpha_star();
    let reg = base_bounds();
    let mut b: Builder<Rational> = Builder::new(&reg);

    b.hypothesis("seed", rat(3, 1), rat(2, 1), rat(1, 2), Anchor::new("hairbrush volume estimate", "TE(3, 2, 1/2)"))?;
    b.relax("seed_lambda", "seed", "lambda", beta.clone(), Anchor::new(ITER, "lambda <= 1 raises the lambda power to 65/28"))?;
    b.relax("seed_mass", "seed_lambda", "mass", rat(2, 3), Anchor::new(ITER, "delta^3 #T <~ 1 raises the mass power to 2/3"))?;
    b.widen_loss("seed_te", "seed_mass", Loss::PolyLog, Anchor::new(ITER, "TE(3, 65/28, 2/3)"))?;

    let eps_bits = (eps.recip().map_or(0, |r| r.height_bits()) as u32).max(1);
    let bits = 64u32.max(2 * eps_bits + 16);
    let near = |a: &Rational| -> Result<bool, DerivationError> {
        let gap = QuadraticNumber::from(a.clone())
            .checked_sub(&star)
            .map_err(|e| DerivationError::Domain(e.to_string()))?;
        Ok(gap.cmp_rational(eps) == Ordering::Less)
    };
    let map = RationalMap::alpha_prime();
    let mut alpha = Rational::one();
    let mut trajectory = vec![alpha.clone()];
    let mut steps = Vec::new();
    let mut hyp = "@seed_te".to_string();
    let mut k = 1;
    while !near(&alpha)? {
        if k > 10_000 {
            return Err(DerivationError::Validity { step: k, detail: "no convergence within 10^4 steps".into() });
        }
        b.set_scope(&format!("k{k}."));
        let c = chain(&mut b, &hyp, &alpha, &beta)?;
        if !c.flags.all() {
            return Err(DerivationError::Validity { step: k, detail: format!("{:?} at alpha = {alpha}", c.flags) });
        }
        let exact = -c.ap.exponent("delta");
        cross_check("closed form of alpha'", &format!("k{k}.alpha_p_bound"), &exact, map.eval(&alpha))?;
        let next = round_up(&exact, &alpha, bits);
        let above = QuadraticNumber::from(next.clone()).checked_cmp(&star).map_err(|e| DerivationError::Domain(e.to_string()))?;
        if next >= alpha || above != Ordering::Greater {
            return Err(DerivationError::Validity { step: k, detail: format!("iterate {next} left (alpha*, {alpha})") });
        }
        b.relax("next_delta", "te_prime", "delta", next.clone(), Anchor::new(ITER, "round the delta power up to the next iterate"))?;
        b.relax(
            "next_te",
            "next_delta",
            "mass",
            Rational::one() - next.clone() / rat(3, 1),
            Anchor::new(ITER, "TE(4-alpha_{k+1}, 65/28, 1-alpha_{k+1}/3)"),
        )?;
        hyp = format!("@k{k}.next_te");
        steps.push(IterationStep {
            k,
            alpha: alpha.clone(),
            alpha_prime: exact.clone(),
            alpha_double_prime: -c.app.exponent("delta"),
            alpha_next: next.clone(),
            flags: c.flags,
            rounded: next != exact,
        });
        trajectory.push(next.clone());
        alpha = next;
        k += 1;
    }
    let k_final = trajectory.len();

    // the α″-bound at the last iterate gives the dimension statement
    b.set_scope("final.");
    let last = chain(&mut b, &hyp, &alpha, &beta)?;
    if !(last.flags.condition_i && last.flags.mass_nonnegative) {
        return Err(DerivationError::Validity { step: k_final, detail: format!("{:?} at alpha = {alpha}", last.flags) });
    }
    let app_k = -last.app.exponent("delta");

    let at_star = derive_self_improve(star.clone(), QuadraticNumber::from(beta.clone()))?;
    if at_star.alpha_prime != star {
        return Err(DerivationError::Domain("alpha* is not fixed by the bound-level step".into()));
    }
    let dim = QuadraticNumber::from(rat(4, 1)) - at_star.alpha_double_prime.clone();
    if dim != d0() {
        return Err(DerivationError::Domain(format!("4 - alpha''(alpha*) = {dim}, not (159 + sqrt(145))/56")));
    }

    let te_err = |e: String| DerivationError::Domain(e);
    let field = |e: crate::algebraic::FieldError| DerivationError::Domain(e.to_string());
    let four = QuadraticNumber::from(rat(4, 1));
    let one = QuadraticNumber::from(Rational::one());
    let three = QuadraticNumber::from(rat(3, 1));
    let te_alpha = TEStatement::new(four.clone() - star.clone(), beta.clone().into(), one.clone() - star.clone() / three)
        .and_then(|t| t.with_slack(eps.clone(), Rational::zero()))
        .map_err(te_err)?;
    let from_alpha = TEStatement::from_rationals(rat(4, 1) - alpha.clone(), beta.clone(), Rational::one() - alpha.clone() / rat(3, 1))
        .map_err(te_err)?;
    let te_dim = TEStatement::new(dim.clone(), dim.clone(), one).and_then(|t| t.with_slack(eps.clone(), eps.clone())).map_err(te_err)?;
    // the λ power before relaxing keeps the slack condition (i) leaves
    let volume_k = b.get("te_pp_volume").clone();
    let from_dim =
        TEStatement::from_rationals(rat(4, 1) - app_k, volume_k.exponent("lambda"), volume_k.exponent("mass")).map_err(te_err)?;
    for (claim, source) in [(&te_alpha, &from_alpha), (&te_dim, &from_dim)] {
        if !claim.implied_by(source).map_err(field)? {
            return Err(DerivationError::Validity { step: k_final, detail: format!("{claim} does not follow from {source}") });
        }
    }

    let window_interval = check_beta_window(&star, &one_q(), &beta)?;
    let derivation = b.finish("kakeya-iterate", Outcome::Quadratic(dim.clone()));
    Ok(IterationOutcome {
        k: k_final,
        alpha_k: alpha,
        trajectory,
        steps,
        derivation,
        te_statements: vec![te_alpha, te_dim],
        d0: dim,
        alpha_star: star,
        window_interval,
    })
}

fn one_q() -> QuadraticNumber {
    QuadraticNumber::from(Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::oracle;

    #[test]
    fn closed_forms_at_one() {
        let s = derive_self_improve(rat(1, 1), rat(65, 28)).unwrap();
        assert_eq!(s.alpha_prime, rat(53, 54));
        assert_eq!(s.alpha_double_prime, rat(27, 28));
        assert_eq!(s.theta_weight, rat(2, 3));
        assert_eq!(s.rho_weight, rat(6, 7));
        assert_eq!(s.match_weight, rat(14, 27));
        assert!(s.flags.all());
        assert_eq!(s.alpha_prime_bound.exponent("mass"), rat(1, 3));
        let te = s.te_prime.unwrap();
        assert_eq!(te.exponent("delta"), rat(53, 54));
        assert_eq!(te.exponent("lambda"), rat(65, 28));
        let te2 = s.te_double_prime.unwrap();
        assert_eq!(te2.exponent("lambda"), rat(4, 1) - rat(27, 28));
    }

    #[test]
    fn bound_level_replays() {
        let reg = base_bounds();
        let s = derive_self_improve(rat(1, 1), rat(65, 28)).unwrap();
        s.derivation.replay(&reg).unwrap();
        oracle::check_derivation(&s.derivation, &reg);
    }

    #[test]
    fn fixed_point_in_quadratic_field() {
        let star = alpha_star();
        let s = derive_self_improve(star.clone(), QuadraticNumber::from(rat(65, 28))).unwrap();
        assert_eq!(s.alpha_prime, star);
        assert_eq!(QuadraticNumber::from(rat(4, 1)) - s.alpha_double_prime, d0());
        assert!(s.flags.all());
    }

    #[test]
    fn lambda_powers_match_closed_forms() {
        let beta = rat(65, 28);
        for (n, d) in [(1, 1), (99, 100), (49, 50), (9719, 10000)] {
            let a = rat(n, d);
            let s = derive_self_improve(a.clone(), beta.clone()).unwrap();
            let two = rat(2, 1);
            let lam_pp = rat(-5, 2) + rat(6, 1) * (Rational::one() - beta.clone()) / (rat(7, 1) * a.clone()) + rat(27, 14) / a.clone();
            assert_eq!(s.alpha_double_prime_bound.exponent("lambda"), lam_pp);
            let lam_p = (rat(196, 1) * a.clone() * a.clone() + rat(96, 1) * a.clone() * beta.clone() - rat(525, 1) * a.clone()
                - rat(144, 1) * beta.clone()
                + rat(306, 1))
                / (rat(108, 1) * (two - a.clone()));
            assert_eq!(s.alpha_prime_bound.exponent("lambda"), lam_p);
            assert_eq!(s.alpha_double_prime_bound.exponent("mass"), rat(23, 28) - rat(9, 14) / a);
        }
    }

    #[test]
    fn flags_agree_with_window_polynomials() {
        for beta in [rat(2, 1), rat(131, 60), rat(65, 28), rat(65, 24), rat(3, 1)] {
            for a in [rat(1, 1), rat(39, 40), rat(98, 100)] {
                let s = derive_self_improve(a.clone(), beta.clone()).unwrap();
                let p1 = condition_i_poly(&beta).eval(&a);
                let p2 = condition_ii_poly(&beta).eval(&a);
                assert_eq!(s.flags.condition_i, !p1.is_negative(), "beta {beta} alpha {a}");
                assert_eq!(s.flags.condition_ii, !p2.is_negative(), "beta {beta} alpha {a}");
            }
        }
    }

    #[test]
    fn beta_window() {
        let one = one_q();
        let ok = check_beta_window(&one, &one, &rat(65, 28)).unwrap();
        assert!(ok.holds());
        let bad = check_beta_window(&one, &one, &rat(3, 1)).unwrap();
        assert!(!bad.condition_i.holds);
        assert_eq!(bad.condition_i.witness, Some(one.clone()));
        let edge = check_beta_window(&one, &one, &rat(65, 24)).unwrap();
        assert!(edge.condition_i.holds);
        assert!(edge.condition_i.min.is_zero());
        let low = check_beta_window(&one, &one, &rat(131, 60)).unwrap();
        assert!(low.condition_ii.holds);
        assert!(low.condition_ii.min.is_zero());
        assert_eq!(ok.beta_max_at_hi, QuadraticNumber::from(rat(65, 24)));
        assert_eq!(ok.beta_min_at_hi, QuadraticNumber::from(rat(131, 60)));
        let whole = check_beta_window(&alpha_star(), &one, &rat(65, 28)).unwrap();
        assert!(whole.holds());
        assert!(check_beta_window(&alpha_star(), &one, &rat(11, 5)).unwrap().condition_ii.holds);
        assert!(!check_beta_window(&alpha_star(), &one, &rat(2, 1)).unwrap().condition_ii.holds);
        assert!(check_beta_window(&QuadraticNumber::from(rat(1, 2)), &one, &rat(65, 28)).is_err());
    }

    #[test]
    fn iteration_converges() {
        let eps = rat(1, 1_000_000_000);
        let out = iterate_self_improvement(&eps).unwrap();
        assert_eq!(out.trajectory[0], rat(1, 1));
        assert_eq!(out.trajectory[1], rat(53, 54));
        assert!(out.trajectory.windows(2).all(|w| w[1] < w[0]));
        let gap = QuadraticNumber::from(out.alpha_k.clone()) - alpha_star();
        assert!(gap.signum() == Ordering::Greater);
        assert_eq!(gap.cmp_rational(&eps), Ordering::Less);
        assert_eq!(out.d0, d0());
        assert_eq!(out.te_statements.len(), 2);
        assert_eq!(out.k, out.trajectory.len());
        assert!(out.window_interval.holds());
        out.derivation.replay(&base_bounds()).unwrap();
    }

    #[test]
    fn domain_checks() {
        assert!(derive_self_improve(rat(0, 1), rat(65, 28)).is_err());
        assert!(derive_self_improve(rat(3, 2), rat(65, 28)).is_err());
        // below 6/7 the rho elimination needs a weight above 1
        assert!(derive_self_improve(rat(1, 2), rat(65, 28)).is_err());
        assert!(iterate_self_improvement(&rat(0, 1)).is_err());
    }
}
