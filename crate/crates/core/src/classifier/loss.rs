use serde::{Deserialize, Serialize};

use super::features::PosteriorPredictive;
use crate::error::{invalid, Result};

/// `K x (d + 1)` weight matrix, row-major; the last column of each row is
/// the class bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Weights {
    n_classes: usize,
    n_features: usize,
    data: Vec<f64>,
}

impl From<Weights> for Vec<Vec<f64>> {
    fn from(w: Weights) -> Self {
        w.rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Weights {
    type Error = crate::error::Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl Weights {
    pub fn zeros(n_classes: usize, n_features: usize) -> Self {
        Self {
            n_classes,
            n_features,
            data: vec![0.0; n_classes * (n_features + 1)],
        }
    }

    pub fn from_flat(n_classes: usize, n_features: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_classes * (n_features + 1) {
            return invalid(format!(
                "expected {} weights for {n_classes} classes and {n_features} features, got {}",
                n_classes * (n_features + 1),
                data.len()
            ));
        }
        Ok(Self {
            n_classes,
            n_features,
            data,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_classes = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if n_classes == 0 || width == 0 || rows.iter().any(|r| r.len() != width) {
            return invalid("weight rows must be non-empty and of equal length");
        }
        Self::from_flat(n_classes, width - 1, rows.concat())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n_features + 1).map(<[f64]>::to_vec).collect()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn row(&self, k: usize) -> &[f64] {
        let w = self.n_features + 1;
        &self.data[k * w..(k + 1) * w]
    }

    /// Frobenius norm, bias included.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|k| {
                let row = self.row(k);
                let (w, b) = row.split_at(self.n_features);
                w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b[0]
            })
            .collect()
    }

    /// Logits without the bias, i.e. the linear part applied to `delta`.
    fn linear(&self, delta: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|k| self.row(k)[..self.n_features].iter().zip(delta).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> PosteriorPredictive {
        PosteriorPredictive::softmax(&self.logits(x))
    }
}

/// Training data already mapped into the model's feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub n_classes: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Features of an image and of its augmented copy.
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Batch {
    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    fn validate(&self, w: &Weights) -> Result<()> {
        if self.features.is_empty() {
            return invalid("batch is empty");
        }
        if self.features.len() != self.labels.len() {
            return invalid("features and labels differ in length");
        }
        if let Some(&y) = self.labels.iter().find(|&&y| y >= self.n_classes) {
            return invalid(format!("label {y} out of range for {} classes", self.n_classes));
        }
        let d = w.n_features;
        if w.n_classes != self.n_classes
            || self.features.iter().any(|x| x.len() != d)
            || self.pairs.iter().any(|(a, b)| a.len() != d || b.len() != d)
        {
            return invalid("weights and batch disagree on dimensions");
        }
        Ok(())
    }
}

/// The three parts of the composite objective and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub cross_entropy: f64,
    pub consistency: f64,
    pub prior: f64,
    pub total: f64,
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn composite_loss_terms(w: &Weights, batch: &Batch, lambda1: f64, lambda2: f64) -> Result<LossTerms> {
    batch.validate(w)?;
    let n = batch.features.len() as f64;
    let cross_entropy = batch
        .features
        .iter()
        .zip(&batch.labels)
        .map(|(x, &y)| {
            let z = w.logits(x);
            log_sum_exp(&z) - z[y]
        })
        .sum::<f64>()
        / n;
    let consistency = if batch.pairs.is_empty() {
        0.0
    } else {
        batch
            .pairs
            .iter()
            .map(|(a, b)| {
                let delta: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
                w.linear(&delta).iter().map(|v| v * v).sum::<f64>()
            })
            .sum::<f64>()
            / batch.pairs.len() as f64
    };
    let prior = 0.5 * w.data.iter().map(|v| v * v).sum::<f64>();
    Ok(LossTerms {
        cross_entropy,
        consistency,
        prior,
        total: cross_entropy + lambda1 * consistency + lambda2 * prior,
    })
}

/// `CE + λ1 · consistency + λ2 · ½‖W‖²`.
pub fn composite_loss(w: &Weights, batch: &Batch, lambda1: f64, lambda2: f64) -> Result<f64> {
    composite_loss_terms(w, batch, lambda1, lambda2).map(|t| t.total)
}

/// Analytic gradient of [`composite_loss`], laid out like the weights.
pub fn composite_gradient(w: &Weights, batch: &Batch, lambda1: f64, lambda2: f64) -> Result<Weights> {
    batch.validate(w)?;
    let d = w.n_features;
    let stride = d + 1;
    let mut g = Weights::zeros(w.n_classes, d);
    let n = batch.features.len() as f64;
    for (x, &y) in batch.features.iter().zip(&batch.labels) {
        let p = w.predict(x);
        for (k, &pk) in p.probs().iter().enumerate() {
            let coef = (pk - f64::from(u8::from(k == y))) / n;
            let row = &mut g.data[k * stride..(k + 1) * stride];
            for (gj, xj) in row.iter_mut().zip(x) {
                *gj += coef * xj;
            }
            row[d] += coef;
        }
    }
    if !batch.pairs.is_empty() && lambda1 != 0.0 {
        let scale = 2.0 * lambda1 / batch.pairs.len() as f64;
        for (a, b) in &batch.pairs {
            let delta: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
            for (k, r) in w.linear(&delta).into_iter().enumerate() {
                let row = &mut g.data[k * stride..k * stride + d];
                for (gj, dj) in row.iter_mut().zip(&delta) {
                    *gj += scale * r * dj;
                }
            }
        }
    }
    for (gj, wj) in g.data.iter_mut().zip(&w.data) {
        *gj += lambda2 * wj;
    }
    Ok(g)
}
