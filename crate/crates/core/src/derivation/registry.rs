// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{mono, Anchor};
use crate::calculus::{double_count, Bound, CountingScale, Loss, SymbolTable};
use crate::rational::{rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub name: String,
    pub bound: Bound,
    pub anchor: Anchor,
    /// Set when the axiom is a double-counted form of another registered statement.
    pub converted_from: Option<String>,
}

/// Immutable collection of the statements derivations may start from.
///
/// `axioms` are the imported multiplicity bounds and structural relations;
/// `auxiliary` holds the volume forms they were converted from and the local
/// counting and endpoint rules that enter single derivations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    axioms: BTreeMap<String, Axiom>,
    auxiliary: BTreeMap<String, Axiom>,
    te_template: String,
    table: SymbolTable,
}

impl Registry {
    pub fn axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.axioms.values()
    }

    pub fn auxiliary(&self) -> impl Iterator<Item = &Axiom> {
        self.auxiliary.values()
    }

    pub fn get(&self, name: &str) -> Option<&Axiom> {
        self.axioms.get(name).or_else(|| self.auxiliary.get(name))
    }

    pub fn bound(&self, name: &str) -> &Bound {
        &self.get(name).unwrap_or_else(|| panic!("no registered statement `{name}`")).bound
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    /// `TE(d, a, b)`: `volume >=~ lambda^a * delta^(4-d) * mass^b ~eps`.
    pub fn te_template(&self) -> &str {
        &self.te_template
    }
}

fn r(n: i64, d: i64) -> Rational {
    rat(n, d)
}

fn upper(q: &str, pairs: &[(&str, Rational)], loss: Loss) -> Bound {
    Bound::upper(q, mono(pairs), loss).expect("well-formed axiom")
}

fn lower(q: &str, pairs: &[(&str, Rational)], loss: Loss) -> Bound {
    Bound::lower(q, mono(pairs), loss).expect("well-formed axiom")
}

/// The six imported statements, the TE template, and the auxiliary relations.
pub fn base_bounds() -> Registry {
    let mut axioms = BTreeMap::new();
    let mut auxiliary = BTreeMap::new();
    let add = |map: &mut BTreeMap<String, Axiom>, name: &str, bound: Bound, location: &str, from: Option<&str>| {
        let anchor = Anchor::new(location, &bound.to_string());
        map.insert(
            name.to_string(),
            Axiom { name: name.to_string(), bound, anchor, converted_from: from.map(str::to_string) },
        );
    };

    // volume forms the multiplicity axioms are read off from
    let planebrush_volume = lower(
        "volume_rho",
        &[("lambda", r(4, 3)), ("rho", r(2, 3)), ("D", r(-4, 3)), ("A", r(-1, 3)), ("mass_rho", r(1, 1))],
        Loss::EpsPower,
    );
    let trilinear_volume =
        lower("volume", &[("lambda", r(13, 4)), ("delta", r(3, 4)), ("rho", r(1, 1)), ("mass", r(1, 4))], Loss::PolyLog);

    add(
        &mut axioms,
        "hairbrush",
        upper("mu", &[("m", r(1, 2)), ("lambda", r(-3, 4)), ("delta", r(-1, 1)), ("mass", r(1, 2))], Loss::EpsPower),
        "hairbrush multiplicity bound for m-parallel two-ends shadings",
        None,
    );
    add(
        &mut axioms,
        "planebrush",
        double_count(&planebrush_volume, &CountingScale::rho()).expect("volume form"),
        "planebrush bound for plany A-parallel rho-tubes",
        Some("planebrush_volume"),
    );
    add(
        &mut axioms,
        "gz",
        double_count(&trilinear_volume, &CountingScale::delta()).expect("volume form"),
        "trilinear Kakeya corollary for quantitatively transverse shadings",
        Some("trilinear_volume"),
    );
    add(
        &mut axioms,
        "dich_xi",
        upper("mu", &[("mu_rho", r(1, 1)), ("mu_tilde", r(1, 1)), ("D", r(-1, 1))], Loss::PolyLog),
        "plany dichotomy, multiplicity factorisation through scale rho",
        None,
    );
    add(
        &mut axioms,
        "dich_ix",
        upper("mu", &[("rho", r(-1, 1)), ("mu_tilde", r(1, 1))], Loss::PolyLog),
        "plany dichotomy, tubes confined to a rho-neighbourhood of a plane",
        None,
    );
    add(
        &mut axioms,
        "mass_ratio",
        upper("mass_ratio", &[("A", r(-1, 1))], Loss::Sharp),
        "counting relation for 1-parallel tubes inside A-parallel rho-tubes",
        None,
    );

    add(&mut auxiliary, "planebrush_volume", planebrush_volume, "planebrush volume estimate", None);
    add(&mut auxiliary, "trilinear_volume", trilinear_volume, "trilinear incidence volume estimate", None);
    add(
        &mut auxiliary,
        "mass_bar_parallel",
        lower("mass_bar", &[("m", r(-1, 1)), ("mass", r(1, 1))], Loss::PolyLog),
        "an m-parallel family contains a 1-parallel subfamily of size #T/m",
        None,
    );
    add(
        &mut auxiliary,
        "mass_parallel",
        upper("mass", &[("m", r(1, 1))], Loss::Sharp),
        "at most m tubes per direction, delta^-3 directions",
        None,
    );
    add(
        &mut auxiliary,
        "endpoint_10_3",
        upper("integral", &[("mu", r(2, 3)), ("m", r(-2, 3)), ("R", r(-1, 1))], Loss::EpsPower),
        "L^{10/3} endpoint: refined decoupling with Tomas-Stein and Hoelder",
        None,
    );
    add(
        &mut auxiliary,
        "endpoint_2",
        upper("integral", &[("lambda", r(1, 1)), ("R", r(1, 1))], Loss::EpsPower),
        "L^2 endpoint by orthogonality",
        None,
    );

    Registry {
        axioms,
        auxiliary,
        te_template: "volume >=~ lambda^a * delta^(4-d) * mass^b ~eps".to_string(),
        table: SymbolTable::standard(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_axioms_plus_template() {
        let reg = base_bounds();
        assert_eq!(reg.axioms().count(), 6);
        assert!(reg.te_template().contains("4-d"));
    }

    #[test]
    fn axioms_round_trip_in_text_and_json() {
        let reg = base_bounds();
        for ax in reg.axioms().chain(reg.auxiliary()) {
            let txt = ax.bound.to_string();
            assert_eq!(txt.parse::<Bound>().unwrap(), ax.bound.statement(), "{txt}");
            let json = serde_json::to_string(&ax.bound).unwrap();
            assert_eq!(serde_json::from_str::<Bound>(&json).unwrap(), ax.bound);
        }
        let json = serde_json::to_string(&reg).unwrap();
        assert_eq!(serde_json::from_str::<Registry>(&json).unwrap(), reg);
    }

    #[test]
    fn converted_axioms_match_their_sources() {
        let reg = base_bounds();
        assert_eq!(
            reg.bound("gz").to_string(),
            "mu <=~ delta^-3/4 * lambda^-9/4 * mass^3/4 * rho^-1 ~log"
        );
        assert_eq!(reg.bound("planebrush").to_string(), "mu_rho <=~ A^1/3 * D^4/3 * lambda^-1/3 * rho^-2/3 ~eps");
        for ax in reg.axioms().filter(|a| a.converted_from.is_some()) {
            let src = reg.bound(ax.converted_from.as_deref().unwrap());
            let scale = if ax.name == "planebrush" { CountingScale::rho() } else { CountingScale::delta() };
            assert_eq!(&double_count(src, &scale).unwrap(), &ax.bound);
        }
    }
}
