// SPDX-License-Identifier: Apache-2.0

//! Shadings: which cells of each tube are used.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::family::Family;
use crate::tube::Tube;
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadingKind {
    Full,
    /// Each cell independently with probability λ.
    Random,
    /// λ|T| cells spread evenly along the axis.
    TwoEnds,
    /// Up to λ|T| cells, all inside the first δ^{ε₁}-window.
    OneEnd,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadingParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadingConfig {
    pub kind: ShadingKind,
    #[serde(default)]
    pub params: ShadingParams,
}

impl Default for ShadingConfig {
    fn default() -> Self {
        ShadingConfig::full()
    }
}

impl ShadingConfig {
    pub const DEFAULT_EPS1: f64 = 0.5;

    pub fn full() -> Self {
        ShadingConfig { kind: ShadingKind::Full, params: ShadingParams::default() }
    }

    pub fn random(lambda: f64) -> Self {
        ShadingConfig { kind: ShadingKind::Random, params: ShadingParams { lambda: Some(lambda), eps1: None } }
    }

    pub fn two_ends(lambda: f64, eps1: f64) -> Self {
        ShadingConfig { kind: ShadingKind::TwoEnds, params: ShadingParams { lambda: Some(lambda), eps1: Some(eps1) } }
    }

    pub fn one_end(lambda: f64, eps1: f64) -> Self {
        ShadingConfig { kind: ShadingKind::OneEnd, params: ShadingParams { lambda: Some(lambda), eps1: Some(eps1) } }
    }

    /// The four shadings used by the standard suites.
    pub fn standard_suite() -> [ShadingConfig; 4] {
        [Self::full(), Self::random(0.25), Self::two_ends(0.25, 0.5), Self::one_end(0.25, 0.5)]
    }

    pub fn label(&self) -> String {
        let l = self.params.lambda.map(|x| x.to_string()).unwrap_or_default();
        let e = self.params.eps1.unwrap_or(Self::DEFAULT_EPS1);
        match self.kind {
            ShadingKind::Full => "full".into(),
            ShadingKind::Random => format!("random({l})"),
            ShadingKind::TwoEnds => format!("two_ends({l}, {e})"),
            ShadingKind::OneEnd => format!("one_end({l}, {e})"),
        }
    }

    pub fn eps1(&self) -> f64 {
        self.params.eps1.unwrap_or(Self::DEFAULT_EPS1)
    }

    fn lambda(&self) -> Result<f64, SimError> {
        match (self.kind, self.params.lambda) {
            (ShadingKind::Full, None) => Ok(1.0),
            (_, Some(l)) if l > 0.0 && l <= 1.0 => Ok(l),
            (ShadingKind::Full, Some(_)) => Err(SimError::config("shading.params.lambda", "full shading takes no lambda")),
            (_, Some(l)) => Err(SimError::config("shading.params.lambda", &format!("{l} is outside (0, 1]"))),
            (_, None) => Err(SimError::config("shading.params.lambda", "required")),
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        self.lambda()?;
        match (self.kind, self.params.eps1) {
            (ShadingKind::Full | ShadingKind::Random, Some(_)) => {
                Err(SimError::config("shading.params.eps1", "only window shadings take eps1"))
            }
            (_, Some(e)) if !(e > 0.0 && e < 1.0) => Err(SimError::config("shading.params.eps1", "must lie in (0, 1)")),
            _ => Ok(()),
        }
    }
}

/// `⌈N·δ^{ε₁}⌉ = ⌈N^{1−ε₁}⌉` layers.
pub fn window_layers(n: u32, eps1: f64) -> usize {
    ((n as f64).powf(1.0 - eps1) - 1e-9).ceil().max(1.0) as usize
}

/// Positions into `tube.cells`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shading {
    Full,
    Subset(Vec<u32>),
}

impl Shading {
    pub fn size(&self, tube: &Tube) -> usize {
        match self {
            Shading::Full => tube.len(),
            Shading::Subset(p) => p.len(),
        }
    }

    pub fn positions<'a>(&'a self, tube: &Tube) -> Box<dyn Iterator<Item = usize> + 'a> {
        match self {
            Shading::Full => Box::new(0..tube.len()),
            Shading::Subset(p) => Box::new(p.iter().map(|&i| i as usize)),
        }
    }
}

/// A family with one shading per tube. The unshaded family is shared.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadedFamily {
    pub family: Arc<Family>,
    pub config: ShadingConfig,
    pub shading: Vec<Shading>,
}

impl ShadedFamily {
    pub fn tube_count(&self) -> usize {
        self.family.tubes.len()
    }

    /// Shaded cell indices of tube `i`.
    pub fn shaded_cells(&self, i: usize) -> impl Iterator<Item = u32> + '_ {
        let t = &self.family.tubes[i];
        self.shading[i].positions(t).map(move |p| t.cells[p])
    }

    /// Axis layers of the shaded cells of tube `i`.
    pub fn shaded_layers(&self, i: usize) -> impl Iterator<Item = u16> + '_ {
        let t = &self.family.tubes[i];
        self.shading[i].positions(t).map(move |p| t.layers[p])
    }
}

/// Positions of `tube.cells` in axis order.
fn axis_order(tube: &Tube) -> Vec<u32> {
    let mut order: Vec<u32> = (0..tube.len() as u32).collect();
    order.sort_by_key(|&p| (tube.layers[p as usize], tube.cells[p as usize]));
    order
}

fn target(lambda: f64, len: usize) -> usize {
    ((lambda * len as f64).round() as usize).clamp(1, len)
}

pub fn make_shading(family: Arc<Family>, config: &ShadingConfig) -> Result<ShadedFamily, SimError> {
    config.validate()?;
    let lambda = config.lambda()?;
    let n = family.spec.n();
    let seed = family.seed;
    let shading = family
        .tubes
        .iter()
        .enumerate()
        .map(|(i, t)| match config.kind {
            ShadingKind::Full => Shading::Full,
            ShadingKind::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 << 32 | i as u64);
                Shading::Subset((0..t.len() as u32).filter(|_| rng.gen::<f64>() < lambda).collect())
            }
            ShadingKind::TwoEnds => {
                let order = axis_order(t);
                let k = target(lambda, t.len());
                let mut pick: Vec<u32> =
                    (0..k).map(|j| order[((2 * j + 1) * t.len()) / (2 * k)]).collect();
                pick.sort_unstable();
                Shading::Subset(pick)
            }
            ShadingKind::OneEnd => {
                let order = axis_order(t);
                let first = t.layers[order[0] as usize] as usize;
                let window = window_layers(n, config.eps1());
                let mut pick: Vec<u32> = order
                    .into_iter()
                    .filter(|&p| (t.layers[p as usize] as usize) < first + window)
                    .take(target(lambda, t.len()))
                    .collect();
                pick.sort_unstable();
                Shading::Subset(pick)
            }
        })
        .collect();
    Ok(ShadedFamily { family, config: config.clone(), shading })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_family, GeneratorConfig, GeneratorName};
    use crate::grid::GridSpec;

    fn fam() -> Arc<Family> {
        let spec = GridSpec::new(3, 16).unwrap();
        Arc::new(make_family(&spec, &GeneratorConfig::new(GeneratorName::Random).with_count(40), 2).unwrap())
    }

    #[test]
    fn rejects_bad_lambda() {
        for l in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(make_shading(fam(), &ShadingConfig::random(l)).is_err());
        }
        assert!(make_shading(fam(), &ShadingConfig::random(1.0)).is_ok());
    }

    #[test]
    fn subsets_are_sorted_and_inside() {
        let f = fam();
        for cfg in ShadingConfig::standard_suite() {
            let s = make_shading(f.clone(), &cfg).unwrap();
            for (t, sh) in f.tubes.iter().zip(&s.shading) {
                if let Shading::Subset(p) = sh {
                    assert!(p.windows(2).all(|w| w[0] < w[1]));
                    assert!(p.iter().all(|&i| (i as usize) < t.len()));
                }
            }
        }
    }

    #[test]
    fn window_sizes() {
        assert_eq!(window_layers(16, 0.5), 4);
        assert_eq!(window_layers(64, 0.5), 8);
        assert_eq!(window_layers(32, 0.5), 6);
    }
}
