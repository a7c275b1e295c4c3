use std::fmt::Write as _;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{FeatureRecord, PosteriorPredictive};
use super::loss::{composite_gradient, composite_loss, Batch, Weights};
use super::optimize::{gradient_descent, GdSettings, Objective};
use crate::error::{invalid, Error, Result};
use crate::imaging::AugmentSpec;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Weight of the augmentation-consistency term.
    pub lambda1: f64,
    /// Weight of the Gaussian prior; also the strong-convexity modulus.
    pub lambda2: f64,
    /// Upper bound on the step; the trainer never exceeds `1 / L_smooth`.
    pub learning_rate: f64,
    pub epochs: usize,
    pub ensemble_size: usize,
    pub seed: u64,
    pub augment_spec: AugmentSpec,
    /// Lipschitz constant used by the generalization report.
    pub lipschitz_l: f64,
    /// Train each member on a bootstrap resample.
    pub bootstrap: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 0.05,
            learning_rate: 1.0,
            epochs: 400,
            ensemble_size: 5,
            seed: 0,
            augment_spec: AugmentSpec {
                rotation_quarter_turns: 1,
                flip_horizontal: true,
                flip_vertical: false,
                photometric_jitter_amplitude: 0.02,
            },
            lipschitz_l: 1.0,
            bootstrap: true,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return invalid(format!("lambda1 must be >= 0, got {}", self.lambda1));
        }
        if !(self.lambda2 > 0.0 && self.lambda2.is_finite()) {
            return invalid(format!("lambda2 must be > 0, got {}", self.lambda2));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if self.epochs == 0 || self.ensemble_size == 0 {
            return invalid("epochs and ensemble_size must be >= 1");
        }
        if !(self.lipschitz_l > 0.0 && self.lipschitz_l.is_finite()) {
            return invalid(format!("lipschitz_l must be > 0, got {}", self.lipschitz_l));
        }
        self.augment_spec.validate()
    }
}

/// Per-feature standardization fitted on the training split. Features with
/// zero variance are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

impl Normalizer {
    const MIN_STD: f64 = 1e-12;

    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        std.iter_mut().for_each(|s| *s = s.sqrt());
        let (kept, dropped): (Vec<usize>, Vec<usize>) = (0..d).partition(|&j| std[j] > Self::MIN_STD);
        if !dropped.is_empty() {
            warn!("dropping {} zero-variance features: {dropped:?}", dropped.len());
        }
        Self {
            mean,
            std,
            kept,
            dropped,
        }
    }

    pub fn n_raw(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, raw: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .map(|&j| (raw[j] - self.mean[j]) / self.std[j])
            .collect()
    }
}

/// Bootstrap ensemble of multinomial logistic members sharing one
/// normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub format_version: u32,
    pub n_classes: usize,
    pub normalizer: Normalizer,
    pub members: Vec<Weights>,
    pub config: TrainingConfig,
    /// Step size actually used (after the smoothness cap and any halving).
    pub step_sizes: Vec<f64>,
}

impl EnsembleModel {
    pub fn n_features(&self) -> usize {
        self.normalizer.n_raw()
    }

    /// Model-space vector (standardized, dropped features removed).
    pub fn embed(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.n_features() {
            return invalid(format!(
                "feature dimension {} does not match model dimension {}",
                raw.len(),
                self.n_features()
            ));
        }
        Ok(self.normalizer.transform(raw))
    }

    pub fn predict_values(&self, raw: &[f64]) -> Result<PosteriorPredictive> {
        let x = self.embed(raw)?;
        let mut probs = vec![0.0; self.n_classes];
        for member in &self.members {
            for (acc, p) in probs.iter_mut().zip(member.predict(&x).probs()) {
                *acc += p;
            }
        }
        let m = self.members.len() as f64;
        probs.iter_mut().for_each(|p| *p /= m);
        // renormalize away accumulated rounding
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        PosteriorPredictive::new(probs)
    }

    /// Largest member Frobenius norm.
    pub fn max_weight_norm(&self) -> f64 {
        self.members.iter().map(Weights::norm).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.format_version != FORMAT_VERSION {
            return invalid(format!(
                "model format version {} is not supported (expected {FORMAT_VERSION})",
                model.format_version
            ));
        }
        Ok(model)
    }
}

/// Mean of the members' softmax outputs.
pub fn predict_posterior(model: &EnsembleModel, feature: &FeatureRecord) -> Result<PosteriorPredictive> {
    model.predict_values(&feature.values())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub member: usize,
    pub epoch: usize,
    pub loss: f64,
    pub distance_to_final: f64,
}

/// `‖θ_t − θ_final‖` and the loss after every epoch of every member.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub entries: Vec<TraceEntry>,
}

impl ConvergenceTrace {
    pub fn member(&self, m: usize) -> impl Iterator<Item = &TraceEntry> + '_ {
        self.entries.iter().filter(move |e| e.member == m)
    }

    /// Whether the member's distances never increase after the first
    /// `skip_fraction` of epochs.
    pub fn is_non_increasing_after(&self, m: usize, skip_fraction: f64) -> bool {
        let d: Vec<f64> = self.member(m).map(|e| e.distance_to_final).collect();
        let start = (d.len() as f64 * skip_fraction).floor() as usize;
        d[start..].windows(2).all(|w| w[1] <= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("member,epoch,loss,distance_to_final\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{}", e.member, e.epoch, e.loss, e.distance_to_final);
        }
        out
    }
}

struct CompositeObjective<'a> {
    batch: &'a Batch,
    n_features: usize,
    lambda1: f64,
    lambda2: f64,
}

impl CompositeObjective<'_> {
    fn weights(&self, theta: &[f64]) -> Weights {
        Weights::from_flat(self.batch.n_classes, self.n_features, theta.to_vec())
            .expect("parameter length fixed by construction")
    }
}

impl Objective for CompositeObjective<'_> {
    fn value(&self, theta: &[f64]) -> f64 {
        composite_loss(&self.weights(theta), self.batch, self.lambda1, self.lambda2)
            .expect("batch validated before training")
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        composite_gradient(&self.weights(theta), self.batch, self.lambda1, self.lambda2)
            .expect("batch validated before training")
            .as_slice()
            .to_vec()
    }
}

fn largest_eigenvalue(gram: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(0.0, f64::max)
}

/// Upper bound on the Lipschitz constant of the composite gradient:
/// `½ λmax(E[x̃x̃ᵀ]) + 2 λ1 λmax(E[ΔΔᵀ]) + λ2`, using that the softmax
/// Hessian is bounded by `½ I`.
fn smoothness_bound(batch: &Batch, lambda1: f64, lambda2: f64) -> f64 {
    let d = batch.n_features();
    let mut gram = DMatrix::<f64>::zeros(d + 1, d + 1);
    for x in &batch.features {
        let v = nalgebra::DVector::from_iterator(d + 1, x.iter().copied().chain([1.0]));
        gram += &v * v.transpose();
    }
    gram /= batch.features.len() as f64;
    let mut bound = 0.5 * largest_eigenvalue(gram) + lambda2;
    if !batch.pairs.is_empty() && d > 0 {
        let mut pair_gram = DMatrix::<f64>::zeros(d, d);
        for (a, b) in &batch.pairs {
            let v = nalgebra::DVector::from_iterator(d, a.iter().zip(b).map(|(p, q)| p - q));
            pair_gram += &v * v.transpose();
        }
        pair_gram /= batch.pairs.len() as f64;
        bound += 2.0 * lambda1 * largest_eigenvalue(pair_gram);
    }
    bound
}

/// Trains an ensemble on labeled records.
///
/// `pairs` hold features of an image and of its augmented copy; they enter
/// the consistency term. Member `m` starts from a seeded Gaussian
/// initialization on its own bootstrap resample (RNG stream `m` of
/// `cfg.seed`).
pub fn train(
    records: &[FeatureRecord],
    pairs: &[(FeatureRecord, FeatureRecord)],
    cfg: &TrainingConfig,
) -> Result<(EnsembleModel, ConvergenceTrace)> {
    cfg.validate()?;
    if records.is_empty() {
        return invalid("no training records");
    }
    let labels: Vec<usize> = records
        .iter()
        .map(|r| r.label.ok_or_else(|| Error::InvalidInput("training record without label".into())))
        .collect::<Result<_>>()?;
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    labels.iter().for_each(|&y| seen[y] = true);
    if seen.iter().filter(|s| **s).count() < 2 {
        return invalid("training needs at least two classes present");
    }
    let raw: Vec<Vec<f64>> = records.iter().map(FeatureRecord::values).collect();
    let d_raw = raw[0].len();
    if raw.iter().any(|r| r.len() != d_raw)
        || pairs.iter().any(|(a, b)| a.dim() != d_raw || b.dim() != d_raw)
    {
        return invalid("feature records have inconsistent dimensions");
    }

    let normalizer = Normalizer::fit(&raw);
    let features: Vec<Vec<f64>> = raw.iter().map(|r| normalizer.transform(r)).collect();
    let pair_features: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .iter()
        .map(|(a, b)| (normalizer.transform(&a.values()), normalizer.transform(&b.values())))
        .collect();
    let d = normalizer.kept.len();

    let run_member = |m: usize| -> Result<(Weights, f64, Vec<TraceEntry>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(m as u64);
        let n = features.len();
        let idx: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let batch = Batch {
            n_classes,
            features: idx.iter().map(|&i| features[i].clone()).collect(),
            labels: idx.iter().map(|&i| labels[i]).collect(),
            pairs: pair_features.clone(),
        };
        let init = Normal::new(0.0, 0.01).expect("valid sigma");
        let start: Vec<f64> = (0..n_classes * (d + 1)).map(|_| init.sample(&mut rng)).collect();
        let step = cfg.learning_rate.min(1.0 / smoothness_bound(&batch, cfg.lambda1, cfg.lambda2));
        let objective = CompositeObjective {
            batch: &batch,
            n_features: d,
            lambda1: cfg.lambda1,
            lambda2: cfg.lambda2,
        };
        let run = gradient_descent(&objective, &start, GdSettings::new(step, cfg.epochs))?;
        let trace = run
            .distances_to_final()
            .into_iter()
            .zip(&run.losses)
            .enumerate()
            .map(|(t, (dist, &loss))| TraceEntry {
                member: m,
                epoch: t + 1,
                loss,
                distance_to_final: dist,
            })
            .collect();
        let weights = Weights::from_flat(n_classes, d, run.last().to_vec())?;
        Ok((weights, run.final_step, trace))
    };

    let results: Vec<_> = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(run_member)
        .collect::<Result<_>>()?;
    let mut members = Vec::with_capacity(results.len());
    let mut step_sizes = Vec::with_capacity(results.len());
    let mut trace = ConvergenceTrace::default();
    for (w, step, entries) in results {
        members.push(w);
        step_sizes.push(step);
        trace.entries.extend(entries);
    }
    Ok((
        EnsembleModel {
            format_version: FORMAT_VERSION,
            n_classes,
            normalizer,
            members,
            config: cfg.clone(),
            step_sizes,
        },
        trace,
    ))
}
