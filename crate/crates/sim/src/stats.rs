// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use kakeya_core::Rational;
use serde::{Deserialize, Serialize};

use crate::shading::ShadedFamily;

/// Incidence statistics of a shaded family.
///
/// `lambda` is the mean over tubes of `|Y(T)|/|T|`; `mu` is the mean over
/// shaded cells of the number of tubes whose shading covers the cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceStats {
    pub dim: usize,
    pub n: u32,
    pub tubes: u64,
    /// `Σ_T |T|`.
    pub tube_cells: u64,
    /// `Σ_T |Y(T)|`.
    pub incidences: u64,
    /// `Σ_Q mult(Q)`.
    pub multiplicity_sum: u64,
    /// `|E_Y|` in cells.
    pub covered_cells: u64,
    pub lambda: Rational,
    pub mu: Rational,
    /// `|E_Y|·δ^dim`.
    pub volume: Rational,
    /// `δ^{dim−1}·#T`.
    pub mass: Rational,
    /// `δ·Σ|T|/#T`, the mean tube measure over `δ^{dim−1}`.
    pub mean_tube_length: Rational,
    /// `volume·μ / (λ·mass)`; equals `mean_tube_length` when every tube has the same cell count or λ = 1.
    pub normalization: Option<Rational>,
    /// multiplicity → number of cells, for multiplicities ≥ 1.
    pub histogram: BTreeMap<u32, u64>,
    pub max_multiplicity: u32,
    /// `Σ_T|Y(T)| = Σ_Q mult(Q)` and `volume·μ = δ^dim·Σ_T|Y(T)|`, both exact.
    pub identity_holds: bool,
}

impl IncidenceStats {
    pub fn delta(&self) -> f64 {
        1.0 / self.n as f64
    }
}

/// Per-cell multiplicity of the shaded family.
pub fn multiplicity(family: &ShadedFamily) -> Vec<u32> {
    let mut mult = vec![0u32; family.family.spec.cell_count()];
    for i in 0..family.tube_count() {
        for c in family.shaded_cells(i) {
            mult[c as usize] += 1;
        }
    }
    mult
}

fn big(n: u64) -> Rational {
    Rational::from_integer(n)
}

pub fn stats(family: &ShadedFamily) -> IncidenceStats {
    let spec = family.family.spec;
    let (dim, n) = (spec.dim(), spec.n());
    let mult = multiplicity(family);
    let mut histogram = BTreeMap::new();
    let mut multiplicity_sum = 0u64;
    for &m in mult.iter().filter(|&&m| m > 0) {
        *histogram.entry(m).or_insert(0u64) += 1;
        multiplicity_sum += m as u64;
    }
    let covered_cells: u64 = histogram.values().sum();
    let max_multiplicity = histogram.keys().next_back().copied().unwrap_or(0);

    // λ summed per tube length keeps the exact sum to a few hundred terms
    let mut by_len: BTreeMap<u64, u64> = BTreeMap::new();
    let mut incidences = 0u64;
    let mut tube_cells = 0u64;
    for (t, s) in family.family.tubes.iter().zip(&family.shading) {
        let y = s.size(t) as u64;
        incidences += y;
        tube_cells += t.len() as u64;
        *by_len.entry(t.len() as u64).or_insert(0) += y;
    }
    let tubes = family.tube_count() as u64;
    let lambda = if tubes == 0 {
        Rational::zero()
    } else {
        by_len.iter().map(|(&len, &y)| Rational::new(y, len)).sum::<Rational>() / big(tubes)
    };
    let mu = if covered_cells == 0 { Rational::zero() } else { Rational::new(multiplicity_sum, covered_cells) };
    let n_big = big(n as u64);
    let volume = Rational::new(covered_cells, 1u64) / n_big.pow(dim as i32);
    let mass = Rational::new(tubes, 1u64) / n_big.pow(dim as i32 - 1);
    let mean_tube_length =
        if tubes == 0 { Rational::zero() } else { Rational::new(tube_cells, tubes) / n_big.clone() };
    let normalization = (!lambda.is_zero()).then(|| &(&volume * &mu) / &(&lambda * &mass));
    let identity_holds = incidences == multiplicity_sum
        && &volume * &mu == Rational::new(incidences, 1u64) / n_big.pow(dim as i32);
    IncidenceStats {
        dim,
        n,
        tubes,
        tube_cells,
        incidences,
        multiplicity_sum,
        covered_cells,
        lambda,
        mu,
        volume,
        mass,
        mean_tube_length,
        normalization,
        histogram,
        max_multiplicity,
        identity_holds,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::family::{make_family, GeneratorConfig, GeneratorName};
    use crate::grid::GridSpec;
    use crate::shading::{make_shading, ShadingConfig};
    use kakeya_core::rat;

    #[test]
    fn single_full_tube() {
        let spec = GridSpec::new(3, 16).unwrap();
        let f = Arc::new(make_family(&spec, &GeneratorConfig::new(GeneratorName::Single), 0).unwrap());
        let cells = f.tubes[0].len() as u64;
        let s = stats(&make_shading(f, &ShadingConfig::full()).unwrap());
        assert_eq!(s.mu, rat(1, 1));
        assert_eq!(s.lambda, rat(1, 1));
        assert_eq!(s.volume, Rational::new(cells, 4096u64));
        assert!(s.identity_holds);
        assert_eq!(s.normalization, Some(s.mean_tube_length.clone()));
    }

    #[test]
    fn bush_centre_multiplicity() {
        let spec = GridSpec::new(3, 8).unwrap();
        let f = Arc::new(make_family(&spec, &GeneratorConfig::new(GeneratorName::Bush).with_count(30), 0).unwrap());
        let sf = make_shading(f, &ShadingConfig::full()).unwrap();
        assert_eq!(multiplicity(&sf)[spec.central_cell() as usize], 30);
        assert_eq!(stats(&sf).max_multiplicity, 30);
    }
}
