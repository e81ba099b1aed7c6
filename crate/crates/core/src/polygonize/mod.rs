//! From an optimized skeleton graph to building polygons: frame-field corner
//! detection, per-wall simplification, planar face tracing and probability
//! filtering.

mod buildings;
mod corners;
mod faces;
mod simplify;

pub use buildings::{filter_buildings, BuildingSet, ScoredBuilding};
pub use corners::detect_corners;
pub use faces::{detect_polygons, Face};
pub use simplify::{merge_short_edges, rdp, split_and_simplify};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplifyConfig {
    /// RDP tolerance in pixels. Zero keeps every vertex.
    pub tolerance: f64,
    /// Faces whose mean interior probability is below this are dropped.
    pub probability_threshold: f64,
    /// Consecutive path nodes closer than this are merged before corner
    /// detection. Zero disables merging.
    pub min_edge_length: f64,
}

impl Default for SimplifyConfig {
    fn default() -> Self {
        SimplifyConfig {
            tolerance: 1.0,
            probability_threshold: 0.5,
            min_edge_length: 0.5,
        }
    }
}

impl SimplifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidInput("tolerance must be finite and >= 0".into()));
        }
        if !(self.probability_threshold > 0.0 && self.probability_threshold < 1.0) {
            return Err(Error::InvalidInput("probability_threshold must be in (0, 1)".into()));
        }
        if !(self.min_edge_length >= 0.0 && self.min_edge_length.is_finite()) {
            return Err(Error::InvalidInput("min_edge_length must be finite and >= 0".into()));
        }
        Ok(())
    }
}
