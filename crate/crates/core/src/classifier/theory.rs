use serde::{Deserialize, Serialize};

use super::features::FeatureRecord;
use super::model::{EnsembleModel, TrainingConfig};
use crate::error::{invalid, Error, Result};

/// Closed-form bound `B · sqrt(Σ ‖x_i‖²) / N` on the empirical Rademacher
/// complexity of `{x ↦ ⟨w, x⟩ : ‖w‖ ≤ B}`. Returns 0 for an empty sample.
pub fn rademacher_bound_linear(features: &[Vec<f64>], b: f64) -> f64 {
    if features.is_empty() {
        return 0.0;
    }
    let sq: f64 = features.iter().flatten().map(|v| v * v).sum();
    b * sq.sqrt() / features.len() as f64
}

/// `L² 𝔯 + sqrt(ln(1/δ) / (2N))`.
pub fn generalization_bound(lipschitz: f64, rademacher: f64, n: usize, delta: f64) -> f64 {
    lipschitz * lipschitz * rademacher + ((1.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n_train: usize,
    pub n_test: usize,
    pub train_zero_one: f64,
    pub test_zero_one: f64,
    pub train_cross_entropy: f64,
    pub test_cross_entropy: f64,
    /// Test minus train 0-1 risk.
    pub observed_gap: f64,
    pub cross_entropy_gap: f64,
    pub weight_norm_bound: f64,
    pub rademacher: f64,
    pub lipschitz_l: f64,
    pub delta: f64,
    pub bound: f64,
    pub violated: bool,
}

fn risks(model: &EnsembleModel, set: &[FeatureRecord]) -> Result<(f64, f64)> {
    let mut zero_one = 0.0;
    let mut ce = 0.0;
    for r in set {
        let y = r
            .label
            .ok_or_else(|| Error::InvalidInput("gap report needs labeled records".into()))?;
        let p = model.predict_values(&r.values())?;
        if y >= p.n_classes() {
            return invalid(format!("label {y} out of range for {} classes", p.n_classes()));
        }
        if p.argmax() != y {
            zero_one += 1.0;
        }
        ce -= p.probs()[y].max(f64::MIN_POSITIVE).ln();
    }
    let n = set.len() as f64;
    Ok((zero_one / n, ce / n))
}

/// Empirical generalization gap next to its Rademacher upper bound.
///
/// The complexity term is evaluated on training features in model space with
/// a trailing 1 for the bias, at `B` = largest member weight norm. The
/// result is a diagnostic; `violated` is informational since the bound only
/// holds with probability `1 − δ`.
pub fn generalization_gap_report(
    model: &EnsembleModel,
    train_set: &[FeatureRecord],
    test_set: &[FeatureRecord],
    cfg: &TrainingConfig,
    delta: f64,
) -> Result<GapReport> {
    if train_set.is_empty() || test_set.is_empty() {
        return invalid("gap report needs non-empty train and test sets");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let (train_zero_one, train_cross_entropy) = risks(model, train_set)?;
    let (test_zero_one, test_cross_entropy) = risks(model, test_set)?;
    let embedded: Vec<Vec<f64>> = train_set
        .iter()
        .map(|r| {
            model.embed(&r.values()).map(|mut x| {
                x.push(1.0);
                x
            })
        })
        .collect::<Result<_>>()?;
    let b = model.max_weight_norm();
    let rademacher = rademacher_bound_linear(&embedded, b);
    let bound = generalization_bound(cfg.lipschitz_l, rademacher, train_set.len(), delta);
    let observed_gap = test_zero_one - train_zero_one;
    Ok(GapReport {
        n_train: train_set.len(),
        n_test: test_set.len(),
        train_zero_one,
        test_zero_one,
        train_cross_entropy,
        test_cross_entropy,
        observed_gap,
        cross_entropy_gap: test_cross_entropy - train_cross_entropy,
        weight_norm_bound: b,
        rademacher,
        lipschitz_l: cfg.lipschitz_l,
        delta,
        bound,
        violated: observed_gap > bound,
    })
}
