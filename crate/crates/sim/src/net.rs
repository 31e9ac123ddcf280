// SPDX-License-Identifier: Apache-2.0

//! δ-separated direction nets by greedy packing.
//!
//! Candidates come from a Halton sequence with a seeded Cranley–Patterson
//! shift, pushed through the Gaussian quantile and normalised, which gives a
//! quasi-uniform stream on the sphere. A candidate is kept iff its line makes
//! angle at least δ with every line already kept.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::grid::GridSpec;

/// Relative guard on the separation angle.
pub const SEPARATION_GUARD: f64 = 1e-9;

/// Candidates drawn per `N^{dim−1}`.
pub const CANDIDATES_PER_CELL: usize = 16;

/// Recorded bounds on `|net|·δ^{dim−1}` for the standard candidate stream.
pub fn density_bounds(dim: usize) -> (f64, f64) {
    match dim {
        3 => (1.0, 6.0),
        _ => (1.0, 8.0),
    }
}

pub type Vector = [f64; 4];

pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionNet {
    pub dim: usize,
    pub n: u32,
    /// Angular separation δ.
    pub separation: f64,
    /// Unit vectors; unused trailing coordinates are zero. Each line is stored once.
    pub points: Vec<Vector>,
    pub candidates_examined: usize,
    pub seed: u64,
}

impl DirectionNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `|net|·δ^{dim−1}`.
    pub fn density(&self) -> f64 {
        self.points.len() as f64 / (self.n as f64).powi(self.dim as i32 - 1)
    }

    /// Smallest angle between two stored lines, by brute force.
    pub fn min_angle(&self) -> f64 {
        let mut best = std::f64::consts::FRAC_PI_2;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min(dot(a, b).abs().min(1.0).acos());
            }
        }
        best
    }
}

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let inv = 1.0 / base as f64;
    while i > 0 {
        f *= inv;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Shifted Halton points mapped to unit vectors.
pub fn candidate_stream(dim: usize, seed: u64) -> impl Iterator<Item = Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (1u64..).filter_map(move |i| {
        let mut v = [0.0; 4];
        for k in 0..dim {
            let u = (radical_inverse(i, PRIMES[k]) + shift[k]).fract().clamp(1e-12, 1.0 - 1e-12);
            v[k] = normal.inverse_cdf(u);
        }
        normalise(v)
    })
}

fn normalise(mut v: Vector) -> Option<Vector> {
    let len = dot(&v, &v).sqrt();
    if !(len > 1e-9) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= len);
    // one representative per line
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-15) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Some(v)
}

/// Buckets points of `[-1, 1]^dim` into cubes of side `h`.
struct SpatialHash {
    dim: usize,
    h: f64,
    buckets: HashMap<u64, Vec<Vector>>,
}

impl SpatialHash {
    fn key_of(&self, v: &Vector) -> [i64; 4] {
        let mut k = [0i64; 4];
        for i in 0..self.dim {
            k[i] = ((v[i] + 1.0) / self.h).floor() as i64;
        }
        k
    }

    fn pack(k: &[i64; 4]) -> u64 {
        k.iter().fold(0u64, |acc, &c| (acc << 16) | (c as u64 & 0xffff))
    }

    fn insert(&mut self, v: Vector) {
        let key = Self::pack(&self.key_of(&v));
        self.buckets.entry(key).or_default().push(v);
    }

    /// Whether some stored point has `dot > threshold` with `v`.
    fn any_close(&self, v: &Vector, threshold: f64) -> bool {
        let base = self.key_of(v);
        let span = 3usize.pow(self.dim as u32);
        for code in 0..span {
            let mut k = base;
            let mut c = code;
            for slot in k.iter_mut().take(self.dim) {
                *slot += (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(bucket) = self.buckets.get(&Self::pack(&k)) {
                if bucket.iter().any(|w| dot(v, w) > threshold) {
                    return true;
                }
            }
        }
        false
    }
}

/// Greedy packing of the given candidates at angular separation δ = 1/N.
pub fn build_from_candidates(dim: usize, n: u32, seed: u64, candidates: impl IntoIterator<Item = Vector>) -> DirectionNet {
    let delta = 1.0 / n as f64;
    let threshold = (delta * (1.0 - SEPARATION_GUARD)).cos();
    let mut hash = SpatialHash { dim, h: 2.0 * (delta / 2.0).sin(), buckets: HashMap::new() };
    let mut points = Vec::new();
    let mut examined = 0;
    for c in candidates {
        examined += 1;
        let Some(v) = normalise(c) else { continue };
        if hash.any_close(&v, threshold) {
            continue;
        }
        hash.insert(v);
        hash.insert(v.map(|x| -x));
        points.push(v);
    }
    DirectionNet { dim, n, separation: delta, points, candidates_examined: examined, seed }
}

/// The standard net: `CANDIDATES_PER_CELL · N^{dim−1}` candidates from the seeded stream.
pub fn build_direction_net(spec: &GridSpec, seed: u64) -> DirectionNet {
    let dim = spec.dim();
    let budget = CANDIDATES_PER_CELL * (spec.n() as usize).pow(dim as u32 - 1);
    let net = build_from_candidates(dim, spec.n(), seed, candidate_stream(dim, seed).take(budget));
    let (lo, hi) = density_bounds(dim);
    assert!(
        (lo..=hi).contains(&net.density()),
        "net density {} outside the recorded range [{lo}, {hi}]",
        net.density()
    );
    net
}
