use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{conformity_score, prediction_set, threshold_rank, ConformalCalibrator};
use crate::classifier::PosteriorPredictive;
use crate::error::{invalid, Result};

fn simplex(probs: Vec<f64>) -> PosteriorPredictive {
    PosteriorPredictive::new(probs).expect("generator output lies on the simplex")
}

/// Source of i.i.d. (posterior, true label) draws.
pub trait SampleGenerator: Sync {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (PosteriorPredictive, usize);
}

/// True-label score is `U(0, 1)`: class 0 gets `1 − u`, the others share `u`.
#[derive(Debug, Clone, Copy)]
pub struct UniformScores {
    pub n_classes: usize,
}

impl SampleGenerator for UniformScores {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (PosteriorPredictive, usize) {
        let u: f64 = rng.random();
        let k = self.n_classes.max(2);
        let mut probs = vec![u / (k - 1) as f64; k];
        probs[0] = 1.0 - u;
        (simplex(probs), 0)
    }
}

/// A model that is always certain and always right.
#[derive(Debug, Clone, Copy)]
pub struct OracleScores {
    pub n_classes: usize,
}

impl SampleGenerator for OracleScores {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (PosteriorPredictive, usize) {
        let y = rng.random_range(0..self.n_classes);
        let mut probs = vec![0.0; self.n_classes];
        probs[y] = 1.0;
        (simplex(probs), y)
    }
}

/// Labels drawn from `softmax(z)` with `z ~ N(0, logit_scale²)`; the model
/// reports `softmax(temperature · z)` with classes rotated by `shift`.
/// `temperature = 1, shift = 0` is perfectly calibrated, larger
/// temperatures are overconfident, and a non-zero shift is a wrong model.
#[derive(Debug, Clone, Copy)]
pub struct LogitModel {
    pub n_classes: usize,
    pub logit_scale: f64,
    pub temperature: f64,
    pub shift: usize,
}

impl SampleGenerator for LogitModel {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (PosteriorPredictive, usize) {
        let normal = Normal::new(0.0, self.logit_scale).expect("finite scale");
        let z: Vec<f64> = (0..self.n_classes).map(|_| normal.sample(rng)).collect();
        let truth = PosteriorPredictive::softmax(&z);
        let mut u: f64 = rng.random();
        let mut y = self.n_classes - 1;
        for (k, &p) in truth.probs().iter().enumerate() {
            if u < p {
                y = k;
                break;
            }
            u -= p;
        }
        let tempered: Vec<f64> = z.iter().map(|v| v * self.temperature).collect();
        let reported = PosteriorPredictive::softmax(&tempered);
        let k = self.n_classes;
        let rotated = (0..k).map(|j| reported.probs()[(j + k - self.shift % k) % k]).collect();
        (simplex(rotated), y)
    }
}

/// `E[coverage] = k / (N + 1)` for continuous exchangeable scores, or 1 on
/// the accept-all branch.
pub fn expected_coverage(n_cal: usize, alpha: f64) -> f64 {
    let k = threshold_rank(n_cal, alpha);
    if k > n_cal {
        1.0
    } else {
        k as f64 / (n_cal as f64 + 1.0)
    }
}

/// Mean and variance of one trial's test coverage. Conditional coverage is
/// `Beta(k, N + 1 − k)`; the trial averages `n_test` Bernoulli draws of it.
pub fn split_conformal_moments(n_cal: usize, n_test: usize, alpha: f64) -> (f64, f64) {
    let k = threshold_rank(n_cal, alpha);
    if k > n_cal {
        return (1.0, 0.0);
    }
    let (a, b) = (k as f64, (n_cal + 1 - k) as f64);
    let mean = a / (a + b);
    let var_c = a * b / ((a + b).powi(2) * (a + b + 1.0));
    let e_c_one_minus_c = mean - (var_c + mean * mean);
    (mean, var_c + e_c_one_minus_c / n_test as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub n_cal: usize,
    pub n_test: usize,
    pub alpha: f64,
    pub n_trials: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Standard error of `mean` across trials.
    pub std_error: f64,
    pub mean_set_size: f64,
    pub expected: f64,
    pub per_trial: Vec<f64>,
}

/// Runs `n_trials` independent calibrate-then-test rounds. Trial `t` draws
/// from ChaCha8 stream `t` of `seed`, so results do not depend on the
/// thread count.
pub fn simulate_coverage<G: SampleGenerator + ?Sized>(
    n_cal: usize,
    n_test: usize,
    alpha: f64,
    n_trials: usize,
    seed: u64,
    generator: &G,
) -> Result<CoverageStats> {
    if n_cal == 0 || n_test == 0 || n_trials == 0 {
        return invalid("n_cal, n_test and n_trials must all be >= 1");
    }
    let trials: Vec<(f64, f64)> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let scores: Vec<f64> = (0..n_cal)
                .map(|_| {
                    let (p, y) = generator.draw(&mut rng);
                    conformity_score(&p, y)
                })
                .collect::<Result<_>>()?;
            let cal = ConformalCalibrator::calibrate(&scores, alpha)?;
            let (mut covered, mut size) = (0usize, 0usize);
            for _ in 0..n_test {
                let (p, y) = generator.draw(&mut rng);
                let set = prediction_set(&p, &cal);
                covered += usize::from(set.contains(y));
                size += set.len();
            }
            Ok((covered as f64 / n_test as f64, size as f64 / n_test as f64))
        })
        .collect::<Result<_>>()?;
    let n = n_trials as f64;
    let per_trial: Vec<f64> = trials.iter().map(|t| t.0).collect();
    let mean = per_trial.iter().sum::<f64>() / n;
    let var = if n_trials > 1 {
        per_trial.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(CoverageStats {
        n_cal,
        n_test,
        alpha,
        n_trials,
        mean,
        min: per_trial.iter().copied().fold(f64::INFINITY, f64::min),
        max: per_trial.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        std_error: (var / n).sqrt(),
        mean_set_size: trials.iter().map(|t| t.1).sum::<f64>() / n,
        expected: expected_coverage(n_cal, alpha),
        per_trial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_always_covers() {
        let s = simulate_coverage(20, 10, 0.1, 50, 3, &OracleScores { n_classes: 3 }).unwrap();
        assert_eq!((s.min, s.max), (1.0, 1.0));
    }

    #[test]
    fn moments() {
        assert!((expected_coverage(99, 0.1) - 0.9).abs() < 1e-12);
        assert_eq!(expected_coverage(3, 0.05), 1.0);
        let (m, v) = split_conformal_moments(1, 1, 0.5);
        assert!((m - 0.5).abs() < 1e-12);
        // Beta(1,1) mixed with one Bernoulli draw is Bernoulli(1/2)
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = UniformScores { n_classes: 2 };
        let a = simulate_coverage(19, 5, 0.1, 40, 11, &g).unwrap();
        let b = simulate_coverage(19, 5, 0.1, 40, 11, &g).unwrap();
        assert_eq!(a, b);
    }
}
