// SPDX-License-Identifier: Apache-2.0

//! Grid simulator for shaded δ-tube families in dimensions 3 and 4.
//!
//! Cells are the `N^dim` cubes of side δ = 1/N in the unit cube. A tube is the
//! set of cells whose centres lie within δ of a unit axis segment; directions
//! come from a greedy δ-separated net. Statistics are exact integers and
//! rationals; only the log-margins and fits use floating point.

pub mod bound;
pub mod checks;
pub mod experiment;
pub mod family;
pub mod grid;
pub mod net;
pub mod shading;
pub mod stats;
pub mod tube;

pub use bound::{verify_bound, verify_volume_bound, MarginReport, SlackBudget};
pub use checks::{check_structure, CheckName, CheckReports};
pub use experiment::{fit_dimension, run, to_csv, FitReport, SimConfig, SimReport};
pub use family::{make_family, Family, GeneratorConfig, GeneratorName};
pub use grid::GridSpec;
pub use net::{build_direction_net, DirectionNet};
pub use shading::{make_shading, ShadedFamily, ShadingConfig, ShadingKind};
pub use stats::{stats, IncidenceStats};
pub use tube::{rasterize_tube, Tube};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("axis segment misses the unit cube")]
    EmptyTube,
    #[error("infeasible family: {0}")]
    Infeasible(String),
    #[error("invalid config at {path}: {message}")]
    InvalidConfig { path: String, message: String },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("bound check: {0}")]
    Bound(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl SimError {
    pub fn config(path: impl Into<String>, message: &str) -> Self {
        SimError::InvalidConfig { path: path.into(), message: message.to_string() }
    }

    fn csv(e: csv::Error) -> Self {
        SimError::Csv(e.to_string())
    }

    /// Configuration problems are usage errors; everything else is a run failure.
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::InvalidConfig { .. } | SimError::InvalidGrid(_))
    }
}
