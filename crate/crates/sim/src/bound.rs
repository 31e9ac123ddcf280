// SPDX-License-Identifier: Apache-2.0

//! Log-margins of measured volumes against proved lower bounds.

use kakeya_core::calculus::{Bound, Relation};
use kakeya_core::derivation::TEStatement;
use kakeya_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::stats::IncidenceStats;
use crate::SimError;

/// Slack allowed on a margin: `eps·ln(1/δ) + ln C`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlackBudget {
    pub eps: f64,
    pub log_c: f64,
}

impl SlackBudget {
    pub fn value(&self, delta: f64) -> f64 {
        self.eps * (1.0 / delta).ln() + self.log_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub statement: String,
    pub log_volume: f64,
    pub log_bound: f64,
    /// `ln volume − ln bound`, natural-log units.
    pub margin: f64,
    pub budget: f64,
    pub passes: bool,
}

/// Values of the bound symbols read off the statistics; `m` is the parallel multiplicity.
fn log_value(stats: &IncidenceStats, m: u32, symbol: &str) -> Result<f64, SimError> {
    Ok(match symbol {
        "lambda" => stats.lambda.to_f64().ln(),
        "delta" => stats.delta().ln(),
        "mass" => stats.mass.to_f64().ln(),
        "m" => (m.max(1) as f64).ln(),
        other => return Err(SimError::Bound(format!("no measured value for symbol {other}"))),
    })
}

fn require_dim4(stats: &IncidenceStats) -> Result<(), SimError> {
    if stats.dim != 4 {
        return Err(SimError::Bound(format!("bounds are stated in dimension 4, stats are from dimension {}", stats.dim)));
    }
    if stats.covered_cells == 0 {
        return Err(SimError::Bound("empty union".into()));
    }
    Ok(())
}

/// Margin against `volume ⪆ λ^a δ^{4−d} mass^b` at the effective (slackened) parameters.
pub fn verify_bound(stats: &IncidenceStats, te: &TEStatement, budget: SlackBudget) -> Result<MarginReport, SimError> {
    require_dim4(stats)?;
    let d = te.effective_d().to_f64();
    let a = te.effective_a().to_f64();
    let b = te.b.to_f64();
    let log_bound = a * log_value(stats, 1, "lambda")? + (4.0 - d) * log_value(stats, 1, "delta")? + b * log_value(stats, 1, "mass")?;
    Ok(finish(te.to_string(), stats, log_bound, budget))
}

/// Margin against any lower bound on `volume` in the measured symbols.
pub fn verify_volume_bound<S: Scalar>(
    stats: &IncidenceStats,
    bound: &Bound<S>,
    m: u32,
    budget: SlackBudget,
) -> Result<MarginReport, SimError> {
    require_dim4(stats)?;
    if bound.quantity().as_str() != "volume" || bound.relation() != Relation::Lower {
        return Err(SimError::Bound(format!("not a lower bound on volume: {bound}")));
    }
    let mut log_bound = 0.0;
    for (s, e) in bound.rhs().iter() {
        log_bound += e.to_f64() * log_value(stats, m, s.as_str())?;
    }
    Ok(finish(bound.to_string(), stats, log_bound, budget))
}

fn finish(statement: String, stats: &IncidenceStats, log_bound: f64, budget: SlackBudget) -> MarginReport {
    let log_volume = stats.volume.to_f64().ln();
    let margin = log_volume - log_bound;
    let budget = budget.value(stats.delta());
    MarginReport { statement, log_volume, log_bound, margin, budget, passes: margin >= -budget }
}
