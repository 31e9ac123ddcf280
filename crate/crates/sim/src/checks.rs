// SPDX-License-Identifier: Apache-2.0

//! Quantitative structure checks. Nothing here thresholds silently: every
//! report carries the measured quantity next to any pass flag.

use std::collections::BTreeMap;

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::net::{dot, Vector};
use crate::shading::{window_layers, ShadedFamily};
use crate::stats::multiplicity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    TwoEnds,
    Plany,
    RobustTransversality,
    MParallel,
}

/// Largest admissible two-ends constant `C` in `max ratio ≤ C·δ^{ε₁}`.
pub const TWO_ENDS_MAX_CONSTANT: f64 = 4.0;
/// A window holding this much of a tube's shading counts as concentrated.
pub const CONCENTRATED_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoEndsReport {
    pub eps1: f64,
    pub window_layers: usize,
    /// Max over tubes and windows of window mass over tube mass.
    pub max_ratio: f64,
    pub mean_max_ratio: f64,
    pub worst_tube: usize,
    /// `max_ratio / δ^{ε₁}`.
    pub constant: f64,
    /// `4·δ^{ε₁/2}`.
    pub loose_bound: f64,
    pub concentrated: bool,
    pub passes: bool,
}

pub fn two_ends(family: &ShadedFamily, eps1: f64) -> TwoEndsReport {
    let n = family.family.spec.n() as usize;
    let delta = 1.0 / n as f64;
    let window = window_layers(n as u32, eps1);
    let mut max_ratio = 0.0f64;
    let mut worst_tube = 0;
    let mut sum = 0.0;
    let mut counted = 0usize;
    let mut per_layer = vec![0u32; n];
    for i in 0..family.tube_count() {
        per_layer.iter_mut().for_each(|x| *x = 0);
        let mut total = 0u32;
        for l in family.shaded_layers(i) {
            per_layer[l as usize] += 1;
            total += 1;
        }
        if total == 0 {
            continue;
        }
        let mut run: u32 = per_layer[..window.min(n)].iter().sum();
        let mut best = run;
        for start in 1..=n.saturating_sub(window) {
            run = run + per_layer[start + window - 1] - per_layer[start - 1];
            best = best.max(run);
        }
        let ratio = best as f64 / total as f64;
        sum += ratio;
        counted += 1;
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_tube = i;
        }
    }
    let constant = max_ratio / delta.powf(eps1);
    let concentrated = max_ratio >= CONCENTRATED_RATIO;
    TwoEndsReport {
        eps1,
        window_layers: window,
        max_ratio,
        mean_max_ratio: if counted == 0 { 0.0 } else { sum / counted as f64 },
        worst_tube,
        constant,
        loose_bound: 4.0 * delta.powf(eps1 / 2.0),
        concentrated,
        passes: constant <= TWO_ENDS_MAX_CONSTANT && !concentrated,
    }
}

/// Shaded tubes through each cell, as a compressed row list.
struct Incidence {
    offsets: Vec<u32>,
    tubes: Vec<u32>,
}

impl Incidence {
    fn build(family: &ShadedFamily) -> Self {
        let mult = multiplicity(family);
        let mut offsets = Vec::with_capacity(mult.len() + 1);
        let mut acc = 0u32;
        offsets.push(0);
        for &m in &mult {
            acc += m;
            offsets.push(acc);
        }
        let mut fill = offsets.clone();
        let mut tubes = vec![0u32; acc as usize];
        for i in 0..family.tube_count() {
            for c in family.shaded_cells(i) {
                tubes[fill[c as usize] as usize] = i as u32;
                fill[c as usize] += 1;
            }
        }
        Incidence { offsets, tubes }
    }

    fn cells(&self) -> impl Iterator<Item = (usize, &[u32])> {
        (0..self.offsets.len() - 1).filter_map(move |c| {
            let (a, b) = (self.offsets[c] as usize, self.offsets[c + 1] as usize);
            (b > a).then(|| (c, &self.tubes[a..b]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanyReport {
    pub cells_checked: usize,
    pub cells_within: usize,
    pub fraction_within: f64,
    /// `C·δ`.
    pub threshold: f64,
    pub max_angle: f64,
    pub mean_angle: f64,
}

/// Largest angle from any of `dirs` to the top-2 eigenspace of their second moment.
pub fn plane_angle(dirs: &[Vector]) -> f64 {
    if dirs.len() <= 2 {
        return 0.0;
    }
    let mut m = Matrix4::<f64>::zeros();
    for v in dirs {
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += v[i] * v[j];
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let basis: Vec<Vector> = idx[..2]
        .iter()
        .map(|&k| {
            let c = eig.eigenvectors.column(k);
            [c[0], c[1], c[2], c[3]]
        })
        .collect();
    dirs.iter()
        .map(|v| {
            let p = dot(v, &basis[0]).powi(2) + dot(v, &basis[1]).powi(2);
            (1.0 - p).max(0.0).sqrt().min(1.0).asin()
        })
        .fold(0.0, f64::max)
}

pub fn plany(family: &ShadedFamily, c: f64) -> PlanyReport {
    let inc = Incidence::build(family);
    let threshold = c * family.family.spec.delta();
    let tubes = &family.family.tubes;
    let mut checked = 0;
    let mut within = 0;
    let mut max_angle = 0.0f64;
    let mut sum = 0.0;
    let mut dirs = Vec::new();
    for (_, through) in inc.cells() {
        dirs.clear();
        dirs.extend(through.iter().map(|&t| tubes[t as usize].direction));
        let a = plane_angle(&dirs);
        checked += 1;
        if a <= threshold {
            within += 1;
        }
        max_angle = max_angle.max(a);
        sum += a;
    }
    PlanyReport {
        cells_checked: checked,
        cells_within: within,
        fraction_within: if checked == 0 { 1.0 } else { within as f64 / checked as f64 },
        threshold,
        max_angle,
        mean_angle: if checked == 0 { 0.0 } else { sum / checked as f64 },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapRow {
    pub radius: f64,
    /// Largest number of a cell's tube directions within angle `radius` of one of them.
    pub max_count: u32,
    /// `max_count / (radius^{ε₁}·μ_Y)`.
    pub max_ratio: f64,
    /// Mean over sampled cells of the cell's largest ratio.
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub eps1: f64,
    pub mu: f64,
    pub cells_sampled: usize,
    pub centres_per_cell: usize,
    pub rows: Vec<CapRow>,
}

/// Caps are centred on (up to `centres`) directions of the cell's own bush and
/// counted at radii `δ·2^k ≤ 1`. At most `max_cells` cells are visited, at an
/// even stride through the cell order.
pub fn robust_transversality(family: &ShadedFamily, eps1: f64, centres: usize, max_cells: usize) -> TransversalityReport {
    let inc = Incidence::build(family);
    let delta = family.family.spec.delta();
    let radii: Vec<f64> = std::iter::successors(Some(delta), |r| Some(r * 2.0)).take_while(|&r| r <= 1.0).collect();
    let cos_r: Vec<f64> = radii.iter().map(|r| r.cos()).collect();
    let occupied: Vec<(usize, &[u32])> = inc.cells().collect();
    let mu = if occupied.is_empty() {
        0.0
    } else {
        occupied.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / occupied.len() as f64
    };
    let stride = occupied.len().div_ceil(max_cells.max(1)).max(1);
    let tubes = &family.family.tubes;
    let mut max_count = vec![0u32; radii.len()];
    let mut max_ratio = vec![0.0f64; radii.len()];
    let mut sum_ratio = vec![0.0f64; radii.len()];
    let mut sampled = 0;
    for (_, through) in occupied.iter().step_by(stride) {
        sampled += 1;
        let step = through.len().div_ceil(centres.max(1)).max(1);
        let mut cell_max = vec![0u32; radii.len()];
        for &u in through.iter().step_by(step) {
            let du = tubes[u as usize].direction;
            let mut counts = vec![0u32; radii.len()];
            for &w in through.iter() {
                let c = dot(&du, &tubes[w as usize].direction).abs();
                // radii ascend, so the first admitting radius starts the tail
                if let Some(k) = cos_r.iter().position(|&cr| c >= cr - 1e-12) {
                    counts[k] += 1;
                }
            }
            let mut acc = 0;
            for k in 0..radii.len() {
                acc += counts[k];
                cell_max[k] = cell_max[k].max(acc);
            }
        }
        for k in 0..radii.len() {
            let ratio = cell_max[k] as f64 / (radii[k].powf(eps1) * mu);
            max_count[k] = max_count[k].max(cell_max[k]);
            max_ratio[k] = max_ratio[k].max(ratio);
            sum_ratio[k] += ratio;
        }
    }
    let rows = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| CapRow {
            radius: r,
            max_count: max_count[k],
            max_ratio: max_ratio[k],
            mean_ratio: if sampled == 0 { 0.0 } else { sum_ratio[k] / sampled as f64 },
        })
        .collect();
    TransversalityReport { eps1, mu, cells_sampled: sampled, centres_per_cell: centres, rows }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MParallelReport {
    pub m: u32,
    pub directions_used: usize,
    /// tubes per direction → number of directions.
    pub histogram: BTreeMap<u32, usize>,
}

pub fn m_parallel(family: &ShadedFamily) -> MParallelReport {
    let mut histogram = BTreeMap::new();
    for &c in family.family.direction_counts.values() {
        *histogram.entry(c).or_insert(0) += 1;
    }
    MParallelReport { m: family.family.m_parallel(), directions_used: family.family.direction_counts.len(), histogram }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_ends: Option<TwoEndsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plany: Option<PlanyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robust_transversality: Option<TransversalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_parallel: Option<MParallelReport>,
}

/// Cap centres and cell budget for the transversality check.
pub const CAP_CENTRES: usize = 32;
pub const CAP_CELLS: usize = 4096;
/// Plane-angle threshold in units of δ.
pub const PLANY_CONSTANT: f64 = 3.0;

pub fn check_structure(family: &ShadedFamily, which: &[CheckName]) -> CheckReports {
    let eps1 = family.config.eps1();
    let mut out = CheckReports::default();
    for w in which {
        match w {
            CheckName::TwoEnds => out.two_ends = Some(two_ends(family, eps1)),
            CheckName::Plany => out.plany = Some(plany(family, PLANY_CONSTANT)),
            CheckName::RobustTransversality => {
                out.robust_transversality = Some(robust_transversality(family, eps1, CAP_CENTRES, CAP_CELLS))
            }
            CheckName::MParallel => out.m_parallel = Some(m_parallel(family)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::family::{make_family, GeneratorConfig, GeneratorName};
    use crate::grid::GridSpec;
    use crate::shading::{make_shading, ShadingConfig};

    #[test]
    fn planar_directions_have_zero_angle() {
        let dirs: Vec<Vector> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.3;
                [t.cos(), t.sin(), 0.0, 0.0]
            })
            .collect();
        assert!(plane_angle(&dirs) < 1e-7);
        let mut tilted = dirs.clone();
        tilted.push([0.0, 0.0, 1.0, 0.0]);
        assert!(plane_angle(&tilted) > 0.5);
    }

    #[test]
    fn window_ratios() {
        let spec = GridSpec::new(4, 16).unwrap();
        let f = Arc::new(make_family(&spec, &GeneratorConfig::new(GeneratorName::Random).with_count(200), 7).unwrap());
        let one = two_ends(&make_shading(f.clone(), &ShadingConfig::one_end(0.25, 0.5)).unwrap(), 0.5);
        assert!(one.max_ratio >= 0.9 && !one.passes);
        let two = two_ends(&make_shading(f, &ShadingConfig::two_ends(0.25, 0.5)).unwrap(), 0.5);
        assert!(two.passes, "{two:?}");
    }

    #[test]
    fn bush_caps_and_parallel() {
        let spec = GridSpec::new(3, 8).unwrap();
        let f = Arc::new(make_family(&spec, &GeneratorConfig::new(GeneratorName::Bush), 1).unwrap());
        let sf = make_shading(f, &ShadingConfig::full()).unwrap();
        assert_eq!(m_parallel(&sf).m, 1);
        let r = robust_transversality(&sf, 0.5, 8, 64);
        assert!(r.rows.windows(2).all(|w| w[0].max_count <= w[1].max_count));
        assert!(r.rows[0].max_count >= 1);
    }
}
