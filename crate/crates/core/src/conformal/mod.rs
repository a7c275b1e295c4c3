//! Split conformal prediction on top of the posterior predictive.
//!
//! Scores are `s = 1 − p(y)`. The threshold is the `k`-th smallest
//! calibration score with `k = ⌈(N + 1)(1 − α)⌉`; when `k > N` every label is
//! accepted (`q = 1`). Set membership uses `≤`, so ties are included.

mod io;
mod simulate;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::PosteriorPredictive;
use crate::error::{invalid, Result};
use crate::FORMAT_VERSION;

pub use io::{parse_predictions_csv, predictions_csv, PredictionRow};
pub use simulate::{
    expected_coverage, simulate_coverage, split_conformal_moments, CoverageStats, LogitModel, OracleScores,
    SampleGenerator, UniformScores,
};

/// `1 − p[y]`.
pub fn conformity_score(p: &PosteriorPredictive, y: usize) -> Result<f64> {
    match p.probs().get(y) {
        Some(&py) => Ok((1.0 - py).clamp(0.0, 1.0)),
        None => invalid(format!("label {y} out of range for {} classes", p.n_classes())),
    }
}

/// Rank of the calibrated threshold, `⌈(N + 1)(1 − α)⌉`.
pub fn threshold_rank(n: usize, alpha: f64) -> usize {
    // the small slack absorbs products like 10 * 0.8 = 8.000000000000002
    let raw = (n as f64 + 1.0) * (1.0 - alpha);
    (raw - 1e-9).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalCalibrator {
    scores: Vec<f64>,
    alpha: f64,
    q: f64,
}

impl ConformalCalibrator {
    pub fn calibrate(scores: &[f64], alpha: f64) -> Result<Self> {
        if scores.is_empty() {
            return invalid("calibration needs at least one score");
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return invalid(format!("conformity scores must lie in [0, 1], got {s}"));
        }
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        let k = threshold_rank(sorted.len(), alpha);
        let q = if k > sorted.len() { 1.0 } else { sorted[k - 1] };
        Ok(Self {
            scores: sorted,
            alpha,
            q,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.scores.len()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Whether the threshold fell back to accepting every label.
    pub fn is_accept_all(&self) -> bool {
        threshold_rank(self.n(), self.alpha) > self.n()
    }

    /// Hex SHA-256 over the little-endian bytes of the sorted scores.
    pub fn scores_digest(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.scores {
            h.update(s.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn record(&self, seed: Option<u64>) -> CalibrationRecord {
        CalibrationRecord {
            format_version: FORMAT_VERSION,
            alpha: self.alpha,
            q: self.q,
            n: self.n(),
            scores_digest: self.scores_digest(),
            seed,
        }
    }
}

/// Serialized form of a calibrator. The scores themselves are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub format_version: u32,
    pub alpha: f64,
    pub q: f64,
    pub n: usize,
    pub scores_digest: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl CalibrationRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(text)?;
        if rec.format_version != FORMAT_VERSION {
            return invalid(format!(
                "calibration format version {} is not supported (expected {FORMAT_VERSION})",
                rec.format_version
            ));
        }
        if !(0.0..=1.0).contains(&rec.q) || !(rec.alpha > 0.0 && rec.alpha < 1.0) {
            return invalid("calibration record has q outside [0, 1] or alpha outside (0, 1)");
        }
        Ok(rec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub labels: Vec<usize>,
    /// `None` for sets not produced by a calibrator (e.g. argmax-only).
    pub alpha: Option<f64>,
    /// Conformity score of every label.
    pub scores: Vec<f64>,
}

impl PredictionSet {
    pub fn contains(&self, y: usize) -> bool {
        self.labels.binary_search(&y).is_ok()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn scores_of(p: &PosteriorPredictive) -> Vec<f64> {
        p.probs().iter().map(|v| (1.0 - v).clamp(0.0, 1.0)).collect()
    }

    /// The singleton `{argmax p}` used as the uncalibrated baseline.
    pub fn argmax_only(p: &PosteriorPredictive) -> Self {
        Self {
            labels: vec![p.argmax()],
            alpha: None,
            scores: Self::scores_of(p),
        }
    }

    /// All labels whose score is at most `q`.
    pub fn from_threshold(p: &PosteriorPredictive, q: f64, alpha: Option<f64>) -> Self {
        let scores = Self::scores_of(p);
        let labels = (0..scores.len()).filter(|&k| scores[k] <= q).collect();
        Self { labels, alpha, scores }
    }
}

/// `{y : 1 − p[y] ≤ q}`.
pub fn prediction_set(p: &PosteriorPredictive, cal: &ConformalCalibrator) -> PredictionSet {
    PredictionSet::from_threshold(p, cal.q(), Some(cal.alpha()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(p: &[f64]) -> PosteriorPredictive {
        PosteriorPredictive::new(p.to_vec()).unwrap()
    }

    #[test]
    fn scores() {
        assert_eq!(conformity_score(&post(&[1.0, 0.0]), 0).unwrap(), 0.0);
        assert_eq!(conformity_score(&post(&[1.0, 0.0]), 1).unwrap(), 1.0);
        assert!((conformity_score(&post(&[0.8, 0.2]), 0).unwrap() - 0.2).abs() < 1e-15);
        assert!(conformity_score(&post(&[0.8, 0.2]), 2).is_err());
    }

    #[test]
    fn calibration_examples() {
        let s: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
        let c = ConformalCalibrator::calibrate(&s, 0.2).unwrap();
        assert_eq!(threshold_rank(9, 0.2), 8);
        assert_eq!(c.q(), 0.8);
        assert_eq!(ConformalCalibrator::calibrate(&[0.37], 0.5).unwrap().q(), 0.37);
        let c = ConformalCalibrator::calibrate(&[0.1, 0.2, 0.3], 0.05).unwrap();
        assert_eq!(c.q(), 1.0);
        assert!(c.is_accept_all());
        assert_eq!(prediction_set(&post(&[0.0, 0.0, 1.0]), &c).labels, vec![0, 1, 2]);
        assert!(ConformalCalibrator::calibrate(&[], 0.1).is_err());
        assert!(ConformalCalibrator::calibrate(&[0.5], 1.0).is_err());
    }

    #[test]
    fn rank_matches_exact_arithmetic() {
        // k = ceil((n+1)(1-α)) for α = a/100, checked in integers
        for n in 1..300usize {
            for a in 1..100usize {
                let exact = ((n + 1) * (100 - a)).div_ceil(100);
                assert_eq!(threshold_rank(n, a as f64 / 100.0), exact, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn set_examples() {
        let p = post(&[0.7, 0.2, 0.1]);
        assert_eq!(PredictionSet::from_threshold(&p, 0.85, None).labels, vec![0, 1]);
        assert_eq!(PredictionSet::from_threshold(&p, 0.35, None).labels, vec![0]);
        assert!(PredictionSet::from_threshold(&p, 0.25, None).is_empty());
        let u = post(&[0.25; 4]);
        assert_eq!(PredictionSet::from_threshold(&u, 0.75, None).len(), 4);
    }

    #[test]
    fn digest_is_order_free() {
        let a = ConformalCalibrator::calibrate(&[0.3, 0.1, 0.2], 0.1).unwrap();
        let b = ConformalCalibrator::calibrate(&[0.2, 0.3, 0.1], 0.1).unwrap();
        assert_eq!(a.scores_digest(), b.scores_digest());
        assert_eq!(a.scores_digest().len(), 64);
        let json = a.record(Some(7)).to_json().unwrap();
        assert_eq!(CalibrationRecord::from_json(&json).unwrap(), a.record(Some(7)));
    }
}
