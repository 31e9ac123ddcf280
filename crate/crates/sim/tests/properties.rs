// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use kakeya_sim::checks::two_ends;
use kakeya_sim::family::make_family_on;
use kakeya_sim::net::{build_from_candidates, candidate_stream, SEPARATION_GUARD};
use kakeya_sim::shading::Shading;
use kakeya_sim::stats::multiplicity;
use kakeya_sim::tube::cell_count_bounds;
use kakeya_sim::*;
use proptest::prelude::*;

fn generator() -> impl Strategy<Value = GeneratorName> {
    prop_oneof![
        Just(GeneratorName::Bush),
        Just(GeneratorName::Hairbrush),
        Just(GeneratorName::PlanySlab),
        Just(GeneratorName::Planebrush),
        Just(GeneratorName::Random),
    ]
}

fn shading() -> impl Strategy<Value = ShadingConfig> {
    prop_oneof![
        Just(ShadingConfig::full()),
        (1u32..=8).prop_map(|k| ShadingConfig::random(k as f64 / 8.0)),
        (1u32..=8).prop_map(|k| ShadingConfig::two_ends(k as f64 / 8.0, 0.5)),
        (1u32..=8).prop_map(|k| ShadingConfig::one_end(k as f64 / 8.0, 0.5)),
    ]
}

fn small_family(dim: usize, n: u32, g: GeneratorName, count: usize, seed: u64) -> Arc<Family> {
    let spec = GridSpec::new(dim, n).unwrap();
    let net = build_direction_net(&spec, seed);
    let mut cfg = GeneratorConfig::new(g);
    // slabs have few directions; let them take what they have
    if !matches!(g, GeneratorName::PlanySlab | GeneratorName::Planebrush) {
        cfg = cfg.with_count(count.min(net.len()));
    }
    Arc::new(make_family_on(&spec, &net, &cfg, seed).unwrap())
}

fn unit(raw: [f64; 4], dim: usize) -> Option<[f64; 4]> {
    let mut v = [0.0; 4];
    v[..dim].copy_from_slice(&raw[..dim]);
    let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (l > 1e-3).then(|| v.map(|x| x / l))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn double_counting_is_exact(dim in 3usize..=4, g in generator(), sh in shading(), count in 1usize..200, seed in 0u64..1000) {
        let f = small_family(dim, 8, g, count, seed);
        let s = stats(&make_shading(f, &sh).unwrap());
        prop_assert_eq!(s.incidences, s.multiplicity_sum);
        prop_assert!(s.identity_holds);
        if sh.kind == ShadingKind::Full {
            prop_assert_eq!(s.normalization, Some(s.mean_tube_length.clone()));
        }
    }

    #[test]
    fn enlarging_a_shading_is_monotone(g in generator(), k in 1u32..8, extra in 0u32..4, seed in 0u64..1000) {
        let f = small_family(3, 16, g, 120, seed);
        let small = make_shading(f.clone(), &ShadingConfig::random(k as f64 / 8.0)).unwrap();
        // add every cell whose position is divisible by extra + 2
        let mut big = small.clone();
        for (t, s) in f.tubes.iter().zip(big.shading.iter_mut()) {
            if let Shading::Subset(p) = s {
                p.extend((0..t.len() as u32).filter(|i| i % (extra + 2) == 0));
                p.sort_unstable();
                p.dedup();
            }
        }
        let (a, b) = (stats(&small), stats(&big));
        prop_assert!(b.volume >= a.volume);
        prop_assert!(b.lambda >= a.lambda);
        let (ma, mb) = (multiplicity(&small), multiplicity(&big));
        prop_assert!(ma.iter().zip(&mb).all(|(x, y)| y >= x));
    }

    #[test]
    fn rasterization_counts(dim in 3usize..=4, n_exp in 2u32..=5, raw in proptest::array::uniform4(-1.0f64..1.0), u in proptest::array::uniform4(0.0f64..1.0)) {
        let n = 1u32 << n_exp;
        let spec = GridSpec::new(dim, n).unwrap();
        if let Some(v) = unit(raw, dim) {
            // anchors that keep the whole segment inside the cube
            let mut a = [0.0; 4];
            for k in 0..dim {
                let h = v[k].abs() / 2.0;
                a[k] = h + u[k] * (1.0 - 2.0 * h);
            }
            let t = rasterize_tube(&spec, 0, v, a).unwrap();
            let (lo, hi) = cell_count_bounds(dim);
            let len = t.len() as f64;
            prop_assert!(len >= lo * n as f64 && len <= hi * n as f64, "{} cells at N = {}", len, n);
            let d = spec.delta();
            for &c in &t.cells {
                let p = spec.center(c);
                let w: Vec<f64> = (0..dim).map(|k| p[k] - a[k]).collect();
                let s: f64 = (0..dim).map(|k| w[k] * v[k]).sum::<f64>().clamp(-0.5, 0.5);
                let r2: f64 = (0..dim).map(|k| (w[k] - s * v[k]).powi(2)).sum();
                prop_assert!(r2 <= d * d * (1.0 + 1e-9));
            }
            prop_assert!(t.cells.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn nets_are_separated(dim in 3usize..=4, seed in 0u64..10_000) {
        let net = build_from_candidates(dim, 8, seed, candidate_stream(dim, seed).take(1500));
        prop_assert!(net.min_angle() >= net.separation * (1.0 - SEPARATION_GUARD));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn window_shadings(n_exp in 4u32..=6, seed in 0u64..100) {
        let n = 1u32 << n_exp;
        let f = small_family(3, n, GeneratorName::Random, 300, seed);
        let delta = 1.0 / n as f64;
        let two = two_ends(&make_shading(f.clone(), &ShadingConfig::two_ends(0.25, 0.5)).unwrap(), 0.5);
        prop_assert!(two.max_ratio <= 4.0 * delta.powf(0.25));
        prop_assert!(two.passes);
        let one = two_ends(&make_shading(f, &ShadingConfig::one_end(0.25, 0.5)).unwrap(), 0.5);
        prop_assert!(one.max_ratio >= 0.9);
        prop_assert!(!one.passes);
    }

    #[test]
    fn deterministic_across_thread_counts(g in generator(), seed in 0u64..1000) {
        let build = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let f = small_family(4, 8, g, 300, seed);
                let s = stats(&make_shading(f.clone(), &ShadingConfig::random(0.5)).unwrap());
                (f, s)
            })
        };
        let (f1, s1) = build(1);
        let (f3, s3) = build(3);
        prop_assert_eq!(f1, f3);
        prop_assert_eq!(s1, s3);
    }
}
