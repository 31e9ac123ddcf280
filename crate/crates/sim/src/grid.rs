// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::SimError;

/// The unit cube in dimension 3 or 4 cut into `N^dim` cells of side δ = 1/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: u32,
}

/// Upper limit on cells so the multiplicity array stays desk-sized.
const MAX_CELLS: u64 = 1 << 26;

impl GridSpec {
    pub fn new(dim: usize, n: u32) -> Result<Self, SimError> {
        if dim != 3 && dim != 4 {
            return Err(SimError::InvalidGrid(format!("dim must be 3 or 4, got {dim}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(SimError::InvalidGrid(format!("N must be a power of two >= 4, got {n}")));
        }
        if (n as u64).pow(dim as u32) > MAX_CELLS {
            return Err(SimError::InvalidGrid(format!("N^dim = {n}^{dim} exceeds the cell budget")));
        }
        Ok(GridSpec { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_count(&self) -> usize {
        (self.n as usize).pow(self.dim as u32)
    }

    /// Row-major index with the first axis varying slowest.
    pub fn index(&self, coords: &[u32]) -> u32 {
        coords.iter().fold(0u32, |acc, &c| acc * self.n + c)
    }

    pub fn coords(&self, mut index: u32) -> Vec<u32> {
        let mut out = vec![0; self.dim];
        for slot in out.iter_mut().rev() {
            *slot = index % self.n;
            index /= self.n;
        }
        out
    }

    pub fn center(&self, index: u32) -> Vec<f64> {
        let d = self.delta();
        self.coords(index).into_iter().map(|c| (c as f64 + 0.5) * d).collect()
    }

    /// The cell holding the cube's centre point on its positive side in every axis.
    pub fn central_cell(&self) -> u32 {
        self.index(&vec![self.n / 2; self.dim])
    }

    pub fn cube_center(&self) -> Vec<f64> {
        vec![0.5; self.dim]
    }
}
