use serde::{Deserialize, Serialize};

use super::PersistenceDiagram;
use crate::error::{invalid, Result};

/// Fixed-length summary of a diagram:
/// `[count, total, max, entropy]` for H0, the same for H1, then `T` samples
/// of the β0 curve and `T` samples of the β1 curve on `t = i / (T - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoFeatureVector {
    pub values: Vec<f64>,
    pub thresholds: usize,
}

impl TopoFeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count(&self, dim: u8) -> f64 {
        self.values[4 * dim as usize]
    }

    pub fn max_persistence(&self, dim: u8) -> f64 {
        self.values[4 * dim as usize + 2]
    }

    pub fn betti_curve(&self, dim: u8) -> &[f64] {
        let start = 8 + dim as usize * self.thresholds;
        &self.values[start..start + self.thresholds]
    }
}

/// Column names for a vector built with `thresholds` samples.
pub fn feature_header(thresholds: usize) -> Vec<String> {
    let mut names: Vec<String> = ["h0", "h1"]
        .iter()
        .flat_map(|h| {
            ["count", "total_pers", "max_pers", "entropy"]
                .iter()
                .map(move |s| format!("{h}_{s}"))
        })
        .collect();
    for b in ["b0", "b1"] {
        names.extend((0..thresholds).map(|i| format!("{b}_t{i}")));
    }
    names
}

/// Shannon entropy of the normalized finite lifetimes; 0 when there are none.
fn persistence_entropy(lifetimes: &[f64]) -> f64 {
    let total: f64 = lifetimes.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -lifetimes
        .iter()
        .map(|l| l / total)
        .filter(|p| *p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Vectorizes a diagram. Summary statistics use finite bars only; bar counts
/// and Betti curves also include essential bars, which stay alive for all
/// `t >= birth`.
pub fn vectorize(diagram: &PersistenceDiagram, thresholds: usize) -> Result<TopoFeatureVector> {
    if thresholds < 2 {
        return invalid(format!("need at least 2 thresholds, got {thresholds}"));
    }
    let mut values = Vec::with_capacity(8 + 2 * thresholds);
    for dim in 0..2u8 {
        let lifetimes: Vec<f64> = diagram
            .in_dim(dim)
            .filter(|b| !b.is_infinite())
            .map(|b| b.persistence())
            .collect();
        values.push(diagram.in_dim(dim).count() as f64);
        values.push(lifetimes.iter().sum());
        values.push(lifetimes.iter().copied().fold(0.0, f64::max));
        values.push(persistence_entropy(&lifetimes));
    }
    for dim in 0..2u8 {
        for i in 0..thresholds {
            let t = i as f64 / (thresholds - 1) as f64;
            let alive = diagram
                .in_dim(dim)
                .filter(|b| b.birth <= t && t < b.death)
                .count();
            values.push(alive as f64);
        }
    }
    Ok(TopoFeatureVector { values, thresholds })
}
