use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Loss names in canonical order.
pub const LOSS_NAMES: [&str; 8] = [
    "int",
    "edge",
    "align",
    "align90",
    "smooth",
    "int_align",
    "edge_align",
    "int_edge",
];

/// One value per training loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerLoss {
    pub int: f64,
    pub edge: f64,
    pub align: f64,
    pub align90: f64,
    pub smooth: f64,
    pub int_align: f64,
    pub edge_align: f64,
    pub int_edge: f64,
}

impl PerLoss {
    pub const fn splat(v: f64) -> Self {
        PerLoss {
            int: v,
            edge: v,
            align: v,
            align90: v,
            smooth: v,
            int_align: v,
            edge_align: v,
            int_edge: v,
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.int,
            self.edge,
            self.align,
            self.align90,
            self.smooth,
            self.int_align,
            self.edge_align,
            self.int_edge,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        PerLoss {
            int: a[0],
            edge: a[1],
            align: a[2],
            align90: a[3],
            smooth: a[4],
            int_align: a[5],
            edge_align: a[6],
            int_edge: a[7],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        LOSS_NAMES.into_iter().zip(self.to_array())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// BCE weight in the segmentation losses; Dice gets `1 - alpha`.
    pub alpha: f64,
    pub lambdas: PerLoss,
    pub norms: PerLoss,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 0.25,
            lambdas: PerLoss {
                int: 10.0,
                edge: 10.0,
                align: 1.0,
                align90: 0.2,
                smooth: 0.005,
                int_align: 0.2,
                edge_align: 0.2,
                int_edge: 0.2,
            },
            norms: PerLoss::splat(1.0),
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        for (name, l) in self.lambdas.iter() {
            if !(l >= 0.0) {
                return Err(Error::InvalidInput(format!("lambda_{name} must be >= 0, got {l}")));
            }
        }
        for (name, n) in self.norms.iter() {
            if !(n > 0.0) {
                return Err(Error::InvalidInput(format!("norm_{name} must be > 0, got {n}")));
            }
        }
        Ok(())
    }

    /// `Σ λ_k · L_k / N_k`.
    pub fn combine(&self, losses: &PerLoss) -> f64 {
        let l = self.lambdas.to_array();
        let n = self.norms.to_array();
        losses
            .to_array()
            .iter()
            .enumerate()
            .map(|(k, v)| l[k] * v / n[k])
            .sum()
    }
}
