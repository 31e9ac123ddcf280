// SPDX-License-Identifier: Apache-2.0

//! Worked examples for each simulator operation.

use std::sync::Arc;

use kakeya_core::derivation::TEStatement;
use kakeya_core::rat;
use kakeya_sim::checks::{m_parallel, plany, two_ends};
use kakeya_sim::experiment::{lemma_volume_bound, wolff_level};
use kakeya_sim::family::make_family_on;
use kakeya_sim::net::build_from_candidates;
use kakeya_sim::stats::multiplicity;
use kakeya_sim::*;

#[test]
fn net_cardinality_dim3() {
    let spec = GridSpec::new(3, 16).unwrap();
    let net = build_direction_net(&spec, 7);
    assert!(net.len() >= 256 / 8 && net.len() <= 256 * 8, "{}", net.len());
    assert!(build_from_candidates(4, 4, 0, [[0.6, 0.8, 0.0, 0.0]]).len() == 1);
}

#[test]
fn axis_parallel_tube_dim4() {
    // radius δ puts 7 or 8 cells in every layer of an axis-parallel tube
    let spec = GridSpec::new(4, 16).unwrap();
    let t = rasterize_tube(&spec, 0, [0.0, 0.0, 0.0, 1.0], [0.5; 4]).unwrap();
    assert!(t.len() >= 16 && t.len() <= 9 * 16, "{}", t.len());
}

#[test]
fn bush_slab_and_parallel() {
    let spec = GridSpec::new(4, 16).unwrap();
    let net = build_direction_net(&spec, 7);
    let bush = Arc::new(make_family_on(&spec, &net, &GeneratorConfig::new(GeneratorName::Bush), 7).unwrap());
    assert_eq!(bush.tubes.len(), net.len());
    let sf = make_shading(bush, &ShadingConfig::full()).unwrap();
    assert_eq!(multiplicity(&sf)[spec.central_cell() as usize] as usize, net.len());
    assert_eq!(m_parallel(&sf).m, 1);
    let s = stats(&sf);
    assert_eq!(s.lambda, rat(1, 1));
    assert_eq!(s.max_multiplicity as usize, net.len());

    let slab = GeneratorConfig::new(GeneratorName::PlanySlab).with_rho_cells(2.0);
    let f = Arc::new(make_family_on(&spec, &net, &slab, 7).unwrap());
    let p = plany(&make_shading(f, &ShadingConfig::full()).unwrap(), 3.0);
    assert_eq!(p.cells_within, p.cells_checked);
}

#[test]
fn one_end_fails_at_64() {
    let spec = GridSpec::new(3, 64).unwrap();
    let net = build_direction_net(&spec, 7);
    let f = Arc::new(make_family_on(&spec, &net, &GeneratorConfig::new(GeneratorName::Random).with_count(2000), 7).unwrap());
    let one = two_ends(&make_shading(f.clone(), &ShadingConfig::one_end(0.25, 0.5)).unwrap(), 0.5);
    assert!(one.max_ratio >= 0.9 && !one.passes);
    let two = two_ends(&make_shading(f, &ShadingConfig::two_ends(0.25, 0.5)).unwrap(), 0.5);
    assert!(two.passes && two.constant <= 4.0, "{two:?}");
}

#[test]
fn random_family_near_full_and_margins() {
    let spec = GridSpec::new(4, 32).unwrap();
    let net = build_direction_net(&spec, 7);
    let f = Arc::new(make_family_on(&spec, &net, &GeneratorConfig::new(GeneratorName::Random), 7).unwrap());
    let s = stats(&make_shading(f, &ShadingConfig::full()).unwrap());
    assert!(s.volume.to_f64() >= 0.5);
    assert!(s.identity_holds);
    let w = verify_bound(&s, &wolff_level(), SlackBudget::default()).unwrap();
    assert!(w.margin >= 0.0 && w.passes);
    let l = verify_volume_bound(&s, &lemma_volume_bound().unwrap(), 1, SlackBudget::default()).unwrap();
    assert!(l.margin.is_finite());
    // TE(4, a, b) against a near-full union: only the λ and mass terms remain
    let te4 = TEStatement::from_rationals(rat(4, 1), rat(1, 1), rat(0, 1)).unwrap();
    assert!(verify_bound(&s, &te4, SlackBudget::default()).unwrap().margin > -0.02);
}

#[test]
fn config_round_trip_and_unknown_keys() {
    let text = r#"{"dim": 4, "N": 8, "generator": {"name": "plany_slab", "params": {"rho_cells": 2}},
                   "shading": {"kind": "two_ends", "params": {"lambda": 0.25, "eps1": 0.5}}, "seed": 7,
                   "checks": ["two_ends", "plany", "m_parallel", "robust_transversality"]}"#;
    let cfg: SimConfig = serde_json::from_str(text).unwrap();
    let back: SimConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, back);
    let r = run(&cfg).unwrap();
    let c = &r.scales[0].checks;
    assert!(c.two_ends.is_some() && c.plany.is_some() && c.m_parallel.is_some() && c.robust_transversality.is_some());
    assert_eq!(r.scales[0].margins.len(), 2);

    let bad = r#"{"dim": 4, "N": 8, "generator": {"name": "bush", "params": {"radius": 2}}, "seed": 1}"#;
    assert!(serde_json::from_str::<SimConfig>(bad).is_err());
    let bad = r#"{"dim": 4, "N": 8, "generator": {"name": "bush"}, "colour": 1}"#;
    assert!(serde_json::from_str::<SimConfig>(bad).is_err());
}

#[test]
fn single_tube_scaling() {
    let mut c = SimConfig::single(3, 8, GeneratorConfig::new(GeneratorName::Single), ShadingConfig::full(), 0);
    c.n = None;
    c.n_list = Some(vec![8, 16, 32, 64]);
    let r = run(&c).unwrap();
    let fit = r.fit.clone().unwrap();
    assert!((fit.d_hat - 1.0).abs() <= 0.1, "{}", fit.d_hat);
    // a second run is byte-identical
    assert_eq!(to_csv(&r).unwrap(), to_csv(&run(&c).unwrap()).unwrap());
}
