// SPDX-License-Identifier: Apache-2.0

//! Tubes as the grid cells whose centres lie within δ of a unit axis segment.

use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;
use crate::net::{dot, Vector};
use crate::SimError;

/// Recorded cell-count range of a tube, as multiples of N, for segments that
/// keep at least half their length inside the cube.
pub fn cell_count_bounds(dim: usize) -> (f64, f64) {
    match dim {
        3 => (0.5, 6.0),
        _ => (0.5, 9.0),
    }
}

/// Relative tolerance on the closed radius test.
const RADIUS_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    /// Index of the direction in the family's net.
    pub direction_index: u32,
    pub direction: Vector,
    /// Midpoint of the axis segment `anchor ± direction/2`.
    pub anchor: Vector,
    /// Cell indices, sorted.
    pub cells: Vec<u32>,
    /// Axis layer of each cell in `[0, N)`, parallel to `cells`.
    pub layers: Vec<u16>,
}

impl Tube {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Squared distance from `c` to the segment `a + t v`, `|t| ≤ 1/2`, and the clamped `t`.
fn segment_distance2(c: &Vector, a: &Vector, v: &Vector) -> (f64, f64) {
    let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2], c[3] - a[3]];
    let t = dot(&w, v).clamp(-0.5, 0.5);
    let r = [w[0] - t * v[0], w[1] - t * v[1], w[2] - t * v[2], w[3] - t * v[3]];
    (dot(&r, &r), t)
}

/// Cells within δ of the unit segment through `anchor` along `direction`.
///
/// Walks the cell layers across the dominant axis; in each layer only the box
/// swept by the part of the segment within δ of that layer is tested.
pub fn rasterize_tube(spec: &GridSpec, direction_index: u32, mut direction: Vector, mut anchor: Vector) -> Result<Tube, SimError> {
    let dim = spec.dim();
    direction[dim..].fill(0.0);
    anchor[dim..].fill(0.0);
    let n = spec.n() as i64;
    let delta = spec.delta();
    let limit = delta * delta * (1.0 + RADIUS_GUARD);
    let major = (0..dim)
        .max_by(|&i, &j| direction[i].abs().total_cmp(&direction[j].abs()))
        .expect("dim >= 1");
    let vk = direction[major];
    let others: Vec<usize> = (0..dim).filter(|&i| i != major).collect();

    let mut found: Vec<(u32, u16)> = Vec::new();
    let mut ranges = vec![(0i64, 0i64); others.len()];
    for j in 0..n {
        let x = (j as f64 + 0.5) * delta;
        let (t0, t1) = {
            let p = (x - delta - anchor[major]) / vk;
            let q = (x + delta - anchor[major]) / vk;
            (p.min(q).max(-0.5), p.max(q).min(0.5))
        };
        if t0 > t1 {
            continue;
        }
        let mut empty = false;
        for (slot, &i) in ranges.iter_mut().zip(&others) {
            let (u, w) = (anchor[i] + t0 * direction[i], anchor[i] + t1 * direction[i]);
            let lo = ((u.min(w) - delta) * n as f64 - 0.5).ceil().max(0.0) as i64;
            let hi = ((u.max(w) + delta) * n as f64 - 0.5).floor().min((n - 1) as f64) as i64;
            if lo > hi {
                empty = true;
            }
            *slot = (lo, hi);
        }
        if empty {
            continue;
        }
        let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            let mut coords = [0u32; 4];
            let mut c = [0.0; 4];
            coords[major] = j as u32;
            c[major] = x;
            for (k, &i) in others.iter().enumerate() {
                coords[i] = cur[k] as u32;
                c[i] = (cur[k] as f64 + 0.5) * delta;
            }
            let (d2, t) = segment_distance2(&c, &anchor, &direction);
            if d2 <= limit {
                let layer = (((t + 0.5) * n as f64).floor() as i64).clamp(0, n - 1) as u16;
                found.push((spec.index(&coords[..dim]), layer));
            }
            // odometer over the other axes
            let mut k = 0;
            while k < cur.len() {
                if cur[k] < ranges[k].1 {
                    cur[k] += 1;
                    break;
                }
                cur[k] = ranges[k].0;
                k += 1;
            }
            if k == cur.len() {
                break;
            }
        }
    }
    if found.is_empty() {
        return Err(SimError::EmptyTube);
    }
    found.sort_unstable();
    let (cells, layers) = found.into_iter().unzip();
    Ok(Tube { direction_index, direction, anchor, cells, layers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(dim: usize) -> Vector {
        let mut v = [0.0; 4];
        v[dim - 1] = 1.0;
        v
    }

    #[test]
    fn axis_parallel_counts() {
        // anchored on a cell corner every layer holds 2^(dim-1) cells
        let spec = GridSpec::new(4, 16).unwrap();
        let t = rasterize_tube(&spec, 0, axis(4), [0.5; 4]).unwrap();
        assert_eq!(t.len(), 16 * 8);
        // anchored on a cell centre: the centre plus its 6 face neighbours
        let c = (7.0 + 0.5) / 16.0;
        let t = rasterize_tube(&spec, 0, axis(4), [c, c, c, 0.5]).unwrap();
        assert_eq!(t.len(), 16 * 7);
        let spec3 = GridSpec::new(3, 16).unwrap();
        assert_eq!(rasterize_tube(&spec3, 0, axis(3), [0.5; 4]).unwrap().len(), 16 * 4);
    }

    #[test]
    fn matches_brute_force() {
        let spec = GridSpec::new(3, 8).unwrap();
        let v = {
            let raw = [0.3, -0.5, 0.81, 0.0];
            let l = dot(&raw, &raw).sqrt();
            raw.map(|x| x / l)
        };
        let a = [0.41, 0.55, 0.47, 0.0];
        let t = rasterize_tube(&spec, 0, v, a).unwrap();
        let d = spec.delta();
        let brute: Vec<u32> = (0..spec.cell_count() as u32)
            .filter(|&i| {
                let c = spec.center(i);
                segment_distance2(&[c[0], c[1], c[2], 0.0], &a, &v).0 <= d * d * (1.0 + RADIUS_GUARD)
            })
            .collect();
        assert_eq!(t.cells, brute);
    }

    #[test]
    fn reversal_and_determinism() {
        let spec = GridSpec::new(4, 8).unwrap();
        let raw = [0.2, 0.7, -0.1, 0.5];
        let l = dot(&raw, &raw).sqrt();
        let v = raw.map(|x| x / l);
        let a = [0.5, 0.45, 0.52, 0.5];
        let t1 = rasterize_tube(&spec, 0, v, a).unwrap();
        let t2 = rasterize_tube(&spec, 0, v, a).unwrap();
        let back = rasterize_tube(&spec, 0, v.map(|x| -x), a).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.cells, back.cells);
    }

    #[test]
    fn outside_is_empty() {
        let spec = GridSpec::new(3, 8).unwrap();
        assert!(matches!(rasterize_tube(&spec, 0, axis(3), [3.0, 3.0, 0.5, 0.0]), Err(SimError::EmptyTube)));
    }
}
