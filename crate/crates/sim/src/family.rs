// SPDX-License-Identifier: Apache-2.0

//! Tube families built from one direction net.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;
use crate::net::{build_direction_net, DirectionNet, Vector};
use crate::tube::{rasterize_tube, Tube};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    /// One tube along the net direction closest to the last axis.
    Single,
    /// Every tube passes through the cube's centre.
    Bush,
    /// Tubes through a stem along the last axis.
    Hairbrush,
    /// Directions near span(e1, e2), anchors near the plane through the centre.
    PlanySlab,
    /// Directions near span(e1, e2), anchors anywhere.
    Planebrush,
    Random,
}

impl GeneratorName {
    pub const STANDARD_SUITE: [GeneratorName; 4] =
        [GeneratorName::Bush, GeneratorName::Hairbrush, GeneratorName::PlanySlab, GeneratorName::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorName::Single => "single",
            GeneratorName::Bush => "bush",
            GeneratorName::Hairbrush => "hairbrush",
            GeneratorName::PlanySlab => "plany_slab",
            GeneratorName::Planebrush => "planebrush",
            GeneratorName::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Number of tubes; defaults to every eligible direction times `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Tubes per direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Slab half-angle and thickness ρ in units of δ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_cells: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub name: GeneratorName,
    #[serde(default)]
    pub params: GeneratorParams,
}

impl GeneratorConfig {
    pub fn new(name: GeneratorName) -> Self {
        GeneratorConfig { name, params: GeneratorParams::default() }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.params.count = Some(count);
        self
    }

    pub fn with_rho_cells(mut self, rho: f64) -> Self {
        self.params.rho_cells = Some(rho);
        self
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.params.m = Some(m);
        self
    }

    pub const DEFAULT_RHO_CELLS: f64 = 2.0;

    fn validate(&self) -> Result<(), SimError> {
        let bad = |key: &str, msg: &str| Err(SimError::config(format!("generator.params.{key}"), msg));
        let slab = matches!(self.name, GeneratorName::PlanySlab | GeneratorName::Planebrush);
        if let Some(rho) = self.params.rho_cells {
            if !slab {
                return bad("rho_cells", "only slab generators take rho_cells");
            }
            if !(rho.is_finite() && rho > 0.0) {
                return bad("rho_cells", "must be positive");
            }
        }
        match self.params.m {
            Some(0) => return bad("m", "must be at least 1"),
            Some(m) if m > 1 && matches!(self.name, GeneratorName::Single | GeneratorName::Bush) => {
                return bad("m", "parallel copies of a bush or single tube coincide")
            }
            _ => {}
        }
        if self.params.count == Some(0) {
            return bad("count", "must be at least 1");
        }
        Ok(())
    }
}

/// A tube family before shading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub spec: GridSpec,
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub net_size: usize,
    pub tubes: Vec<Tube>,
    /// Net direction index → number of tubes using it.
    pub direction_counts: BTreeMap<u32, u32>,
}

impl Family {
    /// Largest number of tubes sharing a direction.
    pub fn m_parallel(&self) -> u32 {
        self.direction_counts.values().copied().max().unwrap_or(0)
    }

    pub fn cell_count_range(&self) -> (usize, usize) {
        let lens = self.tubes.iter().map(Tube::len);
        (lens.clone().min().unwrap_or(0), lens.max().unwrap_or(0))
    }
}

fn angle_to_plane_sine(v: &Vector, dim: usize) -> f64 {
    v[2..dim].iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inside_anchor(rng: &mut ChaCha8Rng, v: &Vector, k: usize) -> f64 {
    let half = v[k].abs() / 2.0;
    half + rng.gen::<f64>() * (1.0 - 2.0 * half)
}

/// Builds the family on the standard net for `seed`.
pub fn make_family(spec: &GridSpec, config: &GeneratorConfig, seed: u64) -> Result<Family, SimError> {
    let net = build_direction_net(spec, seed);
    make_family_on(spec, &net, config, seed)
}

/// Builds the family on a given net. Anchors are drawn sequentially from one
/// seeded stream; rasterisation is pure and may run in parallel.
pub fn make_family_on(spec: &GridSpec, net: &DirectionNet, config: &GeneratorConfig, seed: u64) -> Result<Family, SimError> {
    config.validate()?;
    let dim = spec.dim();
    let delta = spec.delta();
    let rho = config.params.rho_cells.unwrap_or(GeneratorConfig::DEFAULT_RHO_CELLS) * delta;
    let m = config.params.m.unwrap_or(1) as usize;

    let pool: Vec<u32> = match config.name {
        GeneratorName::Single => {
            let best = (0..net.len())
                .max_by(|&i, &j| net.points[i][dim - 1].abs().total_cmp(&net.points[j][dim - 1].abs()))
                .ok_or_else(|| SimError::Infeasible("empty direction net".into()))?;
            vec![best as u32]
        }
        GeneratorName::PlanySlab | GeneratorName::Planebrush => (0..net.len() as u32)
            .filter(|&i| angle_to_plane_sine(&net.points[i as usize], dim) <= rho.sin())
            .collect(),
        _ => (0..net.len() as u32).collect(),
    };
    let capacity = pool.len() * m;
    let count = config.params.count.unwrap_or(capacity);
    if count > capacity || count == 0 {
        return Err(SimError::Infeasible(format!(
            "{} tubes requested but only {} eligible directions x m = {m} are available",
            count,
            pool.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let centre = [0.5; 4];
    let mut placements: Vec<(u32, Vector, Vector)> = Vec::with_capacity(count);
    for i in 0..count {
        let index = pool[i / m];
        let v = net.points[index as usize];
        let mut a = [0.0; 4];
        a[..dim].copy_from_slice(&centre[..dim]);
        match config.name {
            GeneratorName::Single | GeneratorName::Bush => {}
            GeneratorName::Hairbrush => a[dim - 1] += rng.gen_range(-0.25..=0.25),
            GeneratorName::Random | GeneratorName::Planebrush => {
                for (k, slot) in a.iter_mut().enumerate().take(dim) {
                    *slot = inside_anchor(&mut rng, &v, k);
                }
            }
            GeneratorName::PlanySlab => {
                for k in 0..2 {
                    a[k] = inside_anchor(&mut rng, &v, k);
                }
                for slot in a.iter_mut().take(dim).skip(2) {
                    *slot += rng.gen_range(-rho / 2.0..=rho / 2.0);
                }
            }
        }
        placements.push((index, v, a));
    }

    let tubes = placements
        .par_iter()
        .map(|&(index, v, a)| rasterize_tube(spec, index, v, a))
        .collect::<Result<Vec<_>, _>>()?;
    let mut direction_counts = BTreeMap::new();
    for t in &tubes {
        *direction_counts.entry(t.direction_index).or_insert(0) += 1;
    }
    Ok(Family { spec: *spec, seed, generator: config.clone(), net_size: net.len(), tubes, direction_counts })
}
