// SPDX-License-Identifier: Apache-2.0

//! Config-driven runs, scaling fits and CSV output.

use std::sync::Arc;

use kakeya_core::derivation::{derive_lemma_incidence, TEStatement};
use kakeya_core::{rat, Rational};
use serde::{Deserialize, Serialize};

use crate::bound::{verify_bound, verify_volume_bound, MarginReport, SlackBudget};
use crate::checks::{check_structure, CheckName, CheckReports};
use crate::family::{make_family_on, GeneratorConfig};
use crate::grid::GridSpec;
use crate::net::build_direction_net;
use crate::shading::{make_shading, ShadingConfig};
use crate::stats::{stats, IncidenceStats};
use crate::SimError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeParams {
    pub d: Rational,
    pub a: Rational,
    pub b: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dim: usize,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(rename = "N_list", default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub shading: ShadingConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    /// Extra estimates to measure against, beyond TE(3, 2, 1/2) and the incidence lemma.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub te: Vec<TeParams>,
    #[serde(default)]
    pub slack: SlackBudget,
}

impl SimConfig {
    pub fn single(dim: usize, n: u32, generator: GeneratorConfig, shading: ShadingConfig, seed: u64) -> Self {
        SimConfig {
            dim,
            n: Some(n),
            n_list: None,
            generator,
            shading,
            seed,
            checks: Vec::new(),
            te: Vec::new(),
            slack: SlackBudget::default(),
        }
    }

    pub fn scales(&self) -> Result<Vec<u32>, SimError> {
        match (&self.n, &self.n_list) {
            (Some(n), None) => Ok(vec![*n]),
            (None, Some(list)) if list.len() >= 3 => Ok(list.clone()),
            (None, Some(_)) => Err(SimError::config("N_list", "a scaling run needs at least 3 scales")),
            (Some(_), Some(_)) => Err(SimError::config("N_list", "give either N or N_list, not both")),
            (None, None) => Err(SimError::config("N", "missing N or N_list")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub n: u32,
    pub delta: f64,
    pub net_size: usize,
    pub net_density: f64,
    pub tube_cells_min: usize,
    pub tube_cells_max: usize,
    pub m_parallel: u32,
    pub stats: IncidenceStats,
    pub checks: CheckReports,
    pub margins: Vec<MarginReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    /// `dim − slope`, so that `volume ≈ δ^{dim − d̂}`.
    pub d_hat: f64,
    pub r_squared: f64,
    /// `(ln δ, ln volume)`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub scales: Vec<ScaleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
}

/// The Wolff-level estimate every generated family is measured against.
pub fn wolff_level() -> TEStatement {
    TEStatement::from_rationals(rat(3, 1), rat(2, 1), rat(1, 2)).expect("valid statement")
}

/// Least squares of `ln volume` on `ln δ`.
pub fn fit_dimension(dim: usize, rows: &[(f64, f64)]) -> Result<FitReport, SimError> {
    if rows.len() < 2 {
        return Err(SimError::DegenerateFit("fewer than two scales".into()));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(d, v)| (d.ln(), v.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-12) {
        return Err(SimError::DegenerateFit("zero variance in log delta".into()));
    }
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(SimError::DegenerateFit("empty union at some scale".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(FitReport { slope, intercept, d_hat: dim as f64 - slope, r_squared, points: pts })
}

/// Runs the family, shading, statistics, checks and margins at one scale.
pub fn run_scale(config: &SimConfig, n: u32, lemma: Option<&kakeya_core::calculus::Bound>) -> Result<ScaleReport, SimError> {
    let spec = GridSpec::new(config.dim, n)?;
    let net = build_direction_net(&spec, config.seed);
    let family = Arc::new(make_family_on(&spec, &net, &config.generator, config.seed)?);
    let (tube_cells_min, tube_cells_max) = family.cell_count_range();
    let m_parallel = family.m_parallel();
    let shaded = make_shading(family, &config.shading)?;
    let st = stats(&shaded);
    let checks = check_structure(&shaded, &config.checks);
    let mut margins = Vec::new();
    if config.dim == 4 && st.covered_cells > 0 {
        margins.push(verify_bound(&st, &wolff_level(), config.slack)?);
        if let Some(b) = lemma {
            margins.push(verify_volume_bound(&st, b, m_parallel, config.slack)?);
        }
        for p in &config.te {
            let te = TEStatement::from_rationals(p.d.clone(), p.a.clone(), p.b.clone())
                .map_err(|e| SimError::config("te", &e))?;
            margins.push(verify_bound(&st, &te, config.slack)?);
        }
    }
    Ok(ScaleReport {
        n,
        delta: spec.delta(),
        net_size: net.len(),
        net_density: net.density(),
        tube_cells_min,
        tube_cells_max,
        m_parallel,
        stats: st,
        checks,
        margins,
    })
}

/// The incidence lemma's volume form, for margins.
pub fn lemma_volume_bound() -> Result<kakeya_core::calculus::Bound, SimError> {
    derive_lemma_incidence().map(|l| l.volume).map_err(|e| SimError::Bound(e.to_string()))
}

pub fn run(config: &SimConfig) -> Result<SimReport, SimError> {
    let scales = config.scales()?;
    let lemma = if config.dim == 4 { Some(lemma_volume_bound()?) } else { None };
    let reports = scales.iter().map(|&n| run_scale(config, n, lemma.as_ref())).collect::<Result<Vec<_>, _>>()?;
    let fit = if config.n_list.is_some() {
        let rows: Vec<(f64, f64)> = reports.iter().map(|r| (r.delta, r.stats.volume.to_f64())).collect();
        Some(fit_dimension(config.dim, &rows)?)
    } else {
        None
    };
    Ok(SimReport { config: config.clone(), scales: reports, fit })
}

/// One row per scale.
pub fn to_csv(report: &SimReport) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let labels: Vec<String> = report
        .scales
        .first()
        .map(|s| s.margins.iter().map(|m| format!("margin {}", m.statement)).collect())
        .unwrap_or_default();
    let mut header: Vec<String> =
        ["N", "delta", "tubes", "lambda", "mu", "volume", "mass", "lambda_exact", "mu_exact", "volume_exact"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    header.extend(labels);
    w.write_record(&header).map_err(SimError::csv)?;
    for s in &report.scales {
        let st = &s.stats;
        let mut row = vec![
            s.n.to_string(),
            s.delta.to_string(),
            st.tubes.to_string(),
            st.lambda.to_f64().to_string(),
            st.mu.to_f64().to_string(),
            st.volume.to_f64().to_string(),
            st.mass.to_f64().to_string(),
            st.lambda.to_string(),
            st.mu.to_string(),
            st.volume.to_string(),
        ];
        row.extend(s.margins.iter().map(|m| m.margin.to_string()));
        w.write_record(&row).map_err(SimError::csv)?;
    }
    let bytes = w.into_inner().map_err(|e| SimError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| SimError::Csv(e.to_string()))
}
