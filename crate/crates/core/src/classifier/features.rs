use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::topology::TopoFeatureVector;

/// Topological summary plus `[mean, std, min, max]` intensity statistics of
/// one image, with an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub topo: TopoFeatureVector,
    pub intensity_stats: [f64; 4],
    pub label: Option<usize>,
}

impl FeatureRecord {
    pub fn new(topo: TopoFeatureVector, intensity_stats: [f64; 4], label: Option<usize>) -> Result<Self> {
        if topo.values.iter().chain(&intensity_stats).any(|v| !v.is_finite()) {
            return invalid("feature entries must be finite");
        }
        Ok(Self {
            topo,
            intensity_stats,
            label,
        })
    }

    /// Rebuilds a record from a flat vector laid out as
    /// `topo values ++ intensity stats`.
    pub fn from_values(values: &[f64], thresholds: usize, label: Option<usize>) -> Result<Self> {
        let topo_len = 8 + 2 * thresholds;
        if values.len() != topo_len + 4 {
            return invalid(format!(
                "expected {} feature values for T = {thresholds}, got {}",
                topo_len + 4,
                values.len()
            ));
        }
        let topo = TopoFeatureVector {
            values: values[..topo_len].to_vec(),
            thresholds,
        };
        let stats = [values[topo_len], values[topo_len + 1], values[topo_len + 2], values[topo_len + 3]];
        Self::new(topo, stats, label)
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = self.topo.values.clone();
        v.extend_from_slice(&self.intensity_stats);
        v
    }

    pub fn dim(&self) -> usize {
        self.topo.len() + 4
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPredictive {
    probs: Vec<f64>,
}

impl PosteriorPredictive {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("posterior needs at least one class");
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return invalid(format!("probabilities must lie in [0, 1]: {probs:?}"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self { probs })
    }

    /// Softmax of `logits`, computed with the max-shift.
    pub fn softmax(logits: &[f64]) -> Self {
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
        let total: f64 = exps.iter().sum();
        Self {
            probs: exps.into_iter().map(|e| e / total).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_classes(&self) -> usize {
        self.probs.len()
    }

    /// Index of the largest probability; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = k;
            }
        }
        best
    }

    pub fn max_prob(&self) -> f64 {
        self.probs[self.argmax()]
    }
}
