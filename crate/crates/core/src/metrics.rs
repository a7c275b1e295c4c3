//! Classification, calibration and coverage metrics.
//!
//! ECE uses equal-width, right-inclusive confidence bins, with confidence 0
//! placed in the first bin. Brier is the multiclass sum over classes, so it
//! ranges over `[0, 2]`. AUC is the macro average of one-vs-rest
//! Mann–Whitney statistics with half credit for ties.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::classifier::PosteriorPredictive;
use crate::conformal::PredictionSet;
use crate::error::{invalid, Error, Result};
use crate::FORMAT_VERSION;

fn check_aligned(preds: &[PosteriorPredictive], labels: &[usize]) -> Result<usize> {
    if preds.len() != labels.len() {
        return invalid(format!("{} predictions but {} labels", preds.len(), labels.len()));
    }
    if preds.is_empty() {
        return invalid("no predictions to evaluate");
    }
    let k = preds[0].n_classes();
    if preds.iter().any(|p| p.n_classes() != k) {
        return invalid("predictions disagree on the number of classes");
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= k) {
        return invalid(format!("label {y} out of range for {k} classes"));
    }
    Ok(k)
}

pub fn accuracy(preds: &[PosteriorPredictive], labels: &[usize]) -> Result<f64> {
    check_aligned(preds, labels)?;
    let hits = preds.iter().zip(labels).filter(|(p, &y)| p.argmax() == y).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Per-class `(precision, recall, f1, support)`; `None` for classes that
/// never occur and are never predicted.
fn per_class_prf(preds: &[PosteriorPredictive], labels: &[usize], k: usize) -> Vec<Option<(f64, f64, f64, usize)>> {
    let mut tp = vec![0usize; k];
    let mut predicted = vec![0usize; k];
    let mut support = vec![0usize; k];
    for (p, &y) in preds.iter().zip(labels) {
        let yhat = p.argmax();
        predicted[yhat] += 1;
        support[y] += 1;
        if yhat == y {
            tp[y] += 1;
        }
    }
    (0..k)
        .map(|c| {
            if support[c] == 0 && predicted[c] == 0 {
                return None;
            }
            let precision = if predicted[c] > 0 { tp[c] as f64 / predicted[c] as f64 } else { 0.0 };
            let recall = if support[c] > 0 { tp[c] as f64 / support[c] as f64 } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            Some((precision, recall, f1, support[c]))
        })
        .collect()
}

/// Unweighted mean of per-class F1 over classes that occur or are predicted.
pub fn macro_f1(preds: &[PosteriorPredictive], labels: &[usize]) -> Result<f64> {
    let k = check_aligned(preds, labels)?;
    let f1s: Vec<f64> = per_class_prf(preds, labels, k).into_iter().flatten().map(|t| t.2).collect();
    Ok(f1s.iter().sum::<f64>() / f1s.len() as f64)
}

/// Mann–Whitney AUC of positives over negatives with midranks.
pub fn auc_binary(positives: &[f64], negatives: &[f64]) -> Option<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1..=j share their average
        let mid = (i + 1 + j) as f64 / 2.0;
        rank_sum += mid * all[i..j].iter().filter(|e| e.1).count() as f64;
        i = j;
    }
    let (np, nn) = (positives.len() as f64, negatives.len() as f64);
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

fn per_class_auc(preds: &[PosteriorPredictive], labels: &[usize], k: usize) -> Vec<Option<f64>> {
    (0..k)
        .map(|c| {
            let (pos, neg): (Vec<_>, Vec<_>) = preds.iter().zip(labels).partition(|(_, &y)| y == c);
            let pos: Vec<f64> = pos.iter().map(|(p, _)| p.probs()[c]).collect();
            let neg: Vec<f64> = neg.iter().map(|(p, _)| p.probs()[c]).collect();
            let auc = auc_binary(&pos, &neg);
            if auc.is_none() {
                warn!("class {c} has no positives or no negatives; skipped in AUC");
            }
            auc
        })
        .collect()
}

pub fn auc_ovr(preds: &[PosteriorPredictive], labels: &[usize]) -> Result<f64> {
    let k = check_aligned(preds, labels)?;
    let aucs: Vec<f64> = per_class_auc(preds, labels, k).into_iter().flatten().collect();
    if aucs.is_empty() {
        return Err(Error::UndefinedMetric("no class has both positives and negatives".into()));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Index of the right-inclusive bin `((b−1)/B, b/B]` holding `c`.
fn bin_of(c: f64, n_bins: usize) -> usize {
    ((c * n_bins as f64).ceil() as usize).clamp(1, n_bins) - 1
}

pub fn ece(preds: &[PosteriorPredictive], labels: &[usize], n_bins: usize) -> Result<f64> {
    check_aligned(preds, labels)?;
    if n_bins == 0 {
        return invalid("ECE needs at least one bin");
    }
    let mut count = vec![0usize; n_bins];
    let mut correct = vec![0usize; n_bins];
    let mut conf = vec![0.0; n_bins];
    for (p, &y) in preds.iter().zip(labels) {
        let b = bin_of(p.max_prob(), n_bins);
        count[b] += 1;
        conf[b] += p.max_prob();
        correct[b] += usize::from(p.argmax() == y);
    }
    let n = labels.len() as f64;
    Ok((0..n_bins)
        .filter(|&b| count[b] > 0)
        .map(|b| {
            let m = count[b] as f64;
            (m / n) * (correct[b] as f64 / m - conf[b] / m).abs()
        })
        .sum())
}

pub fn brier(preds: &[PosteriorPredictive], labels: &[usize]) -> Result<f64> {
    check_aligned(preds, labels)?;
    let total: f64 = preds
        .iter()
        .zip(labels)
        .map(|(p, &y)| {
            p.probs()
                .iter()
                .enumerate()
                .map(|(k, &pk)| (pk - f64::from(u8::from(k == y))).powi(2))
                .sum::<f64>()
        })
        .sum();
    Ok(total / labels.len() as f64)
}

/// Fraction of samples whose label lies in its set.
pub fn coverage(sets: &[PredictionSet], labels: &[usize]) -> Result<f64> {
    if sets.len() != labels.len() || sets.is_empty() {
        return invalid("sets and labels must be non-empty and aligned");
    }
    Ok(sets.iter().zip(labels).filter(|(s, &y)| s.contains(y)).count() as f64 / sets.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
    /// Coverage among samples of this class; `None` when it has no samples.
    pub coverage: Option<f64>,
    pub mean_set_size: Option<f64>,
}

/// Headline metrics in display order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Schema {
    #[serde(rename = "ACC")]
    pub acc: f64,
    #[serde(rename = "AUC")]
    pub auc: f64,
    #[serde(rename = "ECE")]
    pub ece: f64,
    #[serde(rename = "BS")]
    pub bs: f64,
    #[serde(rename = "CC")]
    pub cc: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub n_samples: usize,
    pub n_classes: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub macro_auc_ovr: f64,
    pub ece: f64,
    pub ece_bins: usize,
    pub brier: f64,
    /// Marginal coverage over all samples.
    pub conformal_coverage: f64,
    pub mean_set_size: f64,
    pub per_class: Vec<ClassMetrics>,
    pub table1_schema: Table1Schema,
}

pub fn evaluate(
    preds: &[PosteriorPredictive],
    sets: &[PredictionSet],
    labels: &[usize],
    n_bins: usize,
) -> Result<EvaluationReport> {
    let k = check_aligned(preds, labels)?;
    let accuracy = accuracy(preds, labels)?;
    let macro_f1 = macro_f1(preds, labels)?;
    let macro_auc_ovr = auc_ovr(preds, labels)?;
    let ece_value = ece(preds, labels, n_bins)?;
    let brier = brier(preds, labels)?;
    let conformal_coverage = coverage(sets, labels)?;
    let mean_set_size = sets.iter().map(PredictionSet::len).sum::<usize>() as f64 / sets.len() as f64;

    let prf = per_class_prf(preds, labels, k);
    let aucs = per_class_auc(preds, labels, k);
    let per_class = (0..k)
        .map(|c| {
            let members: Vec<&PredictionSet> =
                sets.iter().zip(labels).filter(|(_, &y)| y == c).map(|(s, _)| s).collect();
            let m = members.len() as f64;
            let (precision, recall, f1, support) = prf[c].unwrap_or((0.0, 0.0, 0.0, 0));
            ClassMetrics {
                class: c,
                support,
                precision,
                recall,
                f1,
                auc: aucs[c],
                coverage: (!members.is_empty()).then(|| members.iter().filter(|s| s.contains(c)).count() as f64 / m),
                mean_set_size: (!members.is_empty())
                    .then(|| members.iter().map(|s| s.len()).sum::<usize>() as f64 / m),
            }
        })
        .collect();
    Ok(EvaluationReport {
        format_version: FORMAT_VERSION,
        n_samples: labels.len(),
        n_classes: k,
        accuracy,
        macro_f1,
        macro_auc_ovr,
        ece: ece_value,
        ece_bins: n_bins,
        brier,
        conformal_coverage,
        mean_set_size,
        per_class,
        table1_schema: Table1Schema {
            acc: accuracy,
            auc: macro_auc_ovr,
            ece: ece_value,
            bs: brier,
            cc: conformal_coverage,
            f1: macro_f1,
        },
    })
}
