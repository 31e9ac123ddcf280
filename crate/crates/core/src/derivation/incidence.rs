// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{base_bounds, mono, q, Anchor, Builder, Derivation, DerivationError, Outcome, Registry, Scale};
use crate::calculus::{Bound, ExponentVector};
use crate::rational::Rational;
use crate::scalar::Scalar;

const PLANY: &str = "incidence lemma, plany case";

/// Steps shared by the incidence lemma and the self-improving step: the two
/// bounds at scale ρ, their (3/4, 1/4) combination, and the factorisation
/// through `mu_tilde`. Leaves `relation` defined.
pub(super) fn plany_front<S: Scalar>(b: &mut Builder<'_, S>) -> Result<(), DerivationError> {
    b.axiom("hairbrush")?;
    b.axiom("planebrush")?;
    b.substitute(
        "hair_rho",
        "hairbrush",
        vec![
            ("m", mono(&[("A", S::one())])),
            ("delta", mono(&[("rho", S::one())])),
            ("mass", mono(&[("mass_rho", S::one())])),
            ("mu", mono(&[("mu_rho", S::one())])),
        ],
        Anchor::new(PLANY, "mu_rho <=~ A^1/2 * lambda^-3/4 * rho^-1 * mass_rho^1/2"),
    )?;
    b.interpolate(
        "eq_a",
        "planebrush",
        "hair_rho",
        q(3, 4),
        Anchor::new(PLANY, "planebrush^(3/4) * hairbrush_rho^(1/4)"),
    )?;
    b.axiom("dich_xi")?;
    b.compose("relation", "dich_xi", "eq_a", Anchor::new(PLANY, "mu <=~ lambda^-7/16 * rho^-3/4 * A^3/8 * mass_rho^1/8 * mu_tilde"))?;
    Ok(())
}

/// The hairbrush bound for the rescaled δ/ρ-tubes inside one ρ-tube, as `tilde`.
pub(super) fn rescaled_hairbrush<S: Scalar>(b: &mut Builder<'_, S>) -> Result<(), DerivationError> {
    b.substitute(
        "tilde",
        "hairbrush",
        vec![
            ("delta", mono(&[("delta", S::one()), ("rho", -S::one())])),
            ("mass", mono(&[("mass_ratio", S::one())])),
            ("m", ExponentVector::new()),
            ("mu", mono(&[("mu_tilde", S::one())])),
        ],
        Anchor::new(PLANY, "mu_tilde <=~ lambda^-3/4 * (delta/rho)^-1 * mass_ratio^1/2"),
    )
}

/// `mass_rho = mass / mass_ratio`, by definition of the ratio.
pub(super) fn mass_rho_identity<S: Scalar>() -> ExponentVector<S> {
    mono(&[("mass", S::one()), ("mass_ratio", -S::one())])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaIncidence {
    pub derivation: Derivation,
    /// `mu <=~ lambda^-101/100 * delta^-49/50 * mass^1/10`
    pub multiplicity: Bound,
    /// `volume >=~ m^-9/10 * lambda^201/100 * delta^49/50 * mass^9/10`
    pub volume: Bound,
    pub theta_weight: Rational,
    pub rho_weight: Rational,
}

fn expected(text: &str) -> Bound {
    text.parse().expect("well-formed expectation")
}

/// Replays the incidence lemma for m-parallel two-ends shadings.
pub fn derive_lemma_incidence() -> Result<LemmaIncidence, DerivationError> {
    let reg = base_bounds();
    derive_lemma_incidence_with(&reg)
}

fn derive_lemma_incidence_with(reg: &Registry) -> Result<LemmaIncidence, DerivationError> {
    let mut b: Builder<Rational> = Builder::new(reg);
    let rho_weight = lemma_steps(&mut b)?;
    let multiplicity = b.get("mu_final").clone();
    let volume = b.get("volume_final").clone();
    let d = b.finish("lemma-incidence", Outcome::Bound(volume.clone()));
    let theta_weight = d.step("theta_a").and_then(|s| s.op.weight().cloned()).expect("interpolation step");
    Ok(LemmaIncidence { derivation: d, multiplicity, volume, theta_weight, rho_weight })
}

/// Adds the lemma's steps, ending in `mu_final` and `volume_final`; returns the ρ weight.
pub(super) fn lemma_steps(b: &mut Builder<'_, Rational>) -> Result<Rational, DerivationError> {
    plany_front(b)?;
    b.expect("eq_a", "combined rho-scale bound", &expected("mu_rho <=~ D * A^3/8 * lambda^-7/16 * mass_rho^1/8 * rho^-3/4"))?;
    b.expect("relation", "factorised multiplicity", &expected("mu <=~ A^3/8 * lambda^-7/16 * mass_rho^1/8 * mu_tilde * rho^-3/4"))?;

    rescaled_hairbrush(b)?;
    b.expect("tilde", "rescaled hairbrush", &expected("mu_tilde <=~ delta^-1 * lambda^-3/4 * mass_ratio^1/2 * rho"))?;

    b.compose("relation_tilde", "relation", "tilde", Anchor::new(PLANY, "substitute the rescaled hairbrush for mu_tilde"))?;
    b.substitute(
        "relation_mass",
        "relation_tilde",
        vec![("mass_rho", mass_rho_identity())],
        Anchor::plumbing(),
    )?;
    b.axiom("mass_ratio")?;
    b.compose("eq1", "relation_mass", "mass_ratio", Anchor::new(PLANY, "mu <=~ lambda^-19/16 * rho^1/4 * delta^-1 * mass^1/8"))?;
    b.expect("eq1", "first rho-route", &expected("mu <=~ delta^-1 * lambda^-19/16 * mass^1/8 * rho^1/4"))?;

    b.axiom("dich_ix")?;
    b.compose("eq2_tilde", "dich_ix", "tilde", Anchor::new(PLANY, "mu <=~ rho^-1 * mu_tilde"))?;
    b.compose("eq2", "eq2_tilde", "mass_ratio", Anchor::new(PLANY, "mu <=~ lambda^-3/4 * delta^-1 * A^-1/2"))?;
    b.expect("eq2", "plane-neighbourhood route", &expected("mu <=~ A^-1/2 * delta^-1 * lambda^-3/4"))?;

    b.interpolate("theta_a", "eq1", "eq2", q(8, 23), Anchor::new(PLANY, "route1^(8/23) * route2^(15/23)"))?;
    b.drop("theta", "theta_a", "A", Anchor::new(PLANY, "A >= 1 carries a negative power"))?;
    b.expect("theta", "combined routes", &expected("mu <=~ delta^-1 * lambda^-83/92 * mass^1/23 * rho^2/23"))?;

    b.axiom("gz")?;
    let rho_weight = b.eliminate("mu_final", "theta", "gz", "rho", Anchor::new(PLANY, "combined^(23/25) * trilinear^(2/25)"))?;
    b.expect("mu_final", "multiplicity bound", &expected("mu <=~ delta^-49/50 * lambda^-101/100 * mass^1/10"))?;

    b.double_count("volume_1", "mu_final", Scale::Delta, Anchor::new(PLANY, "volume = mu^-1 * lambda * mass"))?;
    b.substitute(
        "volume_bar",
        "volume_1",
        vec![("mass", mono(&[("mass_bar", Rational::one())]))],
        Anchor::new("incidence lemma, m-parallel case", "apply to a 1-parallel subfamily"),
    )?;
    b.axiom("mass_bar_parallel")?;
    b.compose(
        "volume_final",
        "volume_bar",
        "mass_bar_parallel",
        Anchor::new("incidence lemma, m-parallel case", "volume >=~ m^-9/10 * lambda^201/100 * delta^49/50 * mass^9/10"),
    )?;
    b.expect(
        "volume_final",
        "volume form",
        &expected("volume >=~ delta^49/50 * lambda^201/100 * m^-9/10 * mass^9/10"),
    )?;

    Ok(rho_weight)
}

/// The trilinear volume estimate turned into a multiplicity bound.
pub fn derive_cor_gz() -> Result<Derivation, DerivationError> {
    let reg = base_bounds();
    let mut b: Builder<Rational> = Builder::new(&reg);
    b.axiom("trilinear_volume")?;
    b.double_count(
        "gz_derived",
        "trilinear_volume",
        Scale::Delta,
        Anchor::new("trilinear corollary", "volume = mu^-1 * lambda * mass"),
    )?;
    b.expect("gz_derived", "trilinear multiplicity", &expected("mu <=~ delta^-3/4 * lambda^-9/4 * mass^3/4 * rho^-1"))?;
    let registered = reg.bound("gz").statement();
    b.expect("gz_derived", "registered axiom", &registered)?;
    let out = b.get("gz_derived").clone();
    Ok(b.finish("cor-gz", Outcome::Bound(out)))
}
