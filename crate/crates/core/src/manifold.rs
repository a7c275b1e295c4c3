//! Gaussian summaries of class-conditional feature clouds and the
//! Bures–Wasserstein divergence
//!
//! ```text
//! D = ‖μ_a − μ_b‖² + Tr(Σ_a + Σ_b − 2 (Σ_a^{1/2} Σ_b Σ_a^{1/2})^{1/2})
//! ```
//!
//! Covariances use the `1/n` normalization so a single sample gives the zero
//! matrix. The value is reported as a diagnostic only.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::FORMAT_VERSION;

const ASYMMETRY_TOL: f64 = 1e-6;
const EIGEN_CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    n: usize,
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

impl GaussianSummary {
    /// Symmetrizes `covariance` and clamps eigenvalues in
    /// `[−1e−10·scale, 0)` to zero. More negative spectra are rejected.
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>, n: usize) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return invalid(format!(
                "covariance is {}x{} but the mean has dimension {d}",
                covariance.nrows(),
                covariance.ncols()
            ));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return invalid("Gaussian summary entries must be finite");
        }
        let asym = max_asymmetry(&covariance);
        if asym > ASYMMETRY_TOL {
            return invalid(format!("covariance asymmetry {asym:e} exceeds {ASYMMETRY_TOL:e}"));
        }
        let mut sym = (&covariance + covariance.transpose()) * 0.5;
        if d > 0 {
            let eig = SymmetricEigen::new(sym.clone());
            let scale = eig.eigenvalues.abs().max().max(1.0);
            let min = eig.eigenvalues.min();
            if min < -EIGEN_CLAMP_TOL * scale {
                return invalid(format!("covariance has negative eigenvalue {min:e}"));
            }
            if min < 0.0 {
                let clamped = eig.eigenvalues.map(|v| v.max(0.0));
                sym = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
                sym = (&sym + sym.transpose()) * 0.5;
            }
        }
        Ok(Self {
            mean,
            covariance: sym.row_iter().map(|r| r.iter().copied().collect()).collect(),
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.covariance[i][j])
    }
}

/// Sample mean and `1/n` covariance.
pub fn gaussian_summary(points: &[Vec<f64>]) -> Result<GaussianSummary> {
    let Some(first) = points.first() else {
        return invalid("Gaussian summary needs at least one point");
    };
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return invalid("points have inconsistent dimensions");
    }
    let n = points.len() as f64;
    let mut mean = DVector::<f64>::zeros(d);
    for p in points {
        mean += DVector::from_column_slice(p);
    }
    mean /= n;
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for p in points {
        let c = DVector::from_column_slice(p) - &mean;
        cov += &c * c.transpose();
    }
    cov /= n;
    GaussianSummary::new(mean.iter().copied().collect(), cov, points.len())
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return invalid("psd_sqrt needs a square matrix");
    }
    let asym = max_asymmetry(m);
    if asym > ASYMMETRY_TOL {
        return invalid(format!("matrix asymmetry {asym:e} exceeds {ASYMMETRY_TOL:e}"));
    }
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let r = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTerms {
    pub mean_term: f64,
    pub trace_term: f64,
    pub total: f64,
}

pub fn joint_divergence_terms(a: &GaussianSummary, b: &GaussianSummary) -> Result<DivergenceTerms> {
    if a.dim() != b.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
    }
    let mean_term: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y).powi(2)).sum();
    let (sa, sb) = (a.covariance(), b.covariance());
    let root_a = psd_sqrt(&sa)?;
    let inner = &root_a * &sb * &root_a;
    let cross = psd_sqrt(&((&inner + inner.transpose()) * 0.5))?;
    let mut trace_term = sa.trace() + sb.trace() - 2.0 * cross.trace();
    if trace_term < -1e-8 {
        warn!("trace term {trace_term:e} is below -1e-8; flooring at 0");
    }
    trace_term = trace_term.max(0.0);
    Ok(DivergenceTerms {
        mean_term,
        trace_term,
        total: mean_term + trace_term,
    })
}

pub fn joint_divergence(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    joint_divergence_terms(a, b).map(|t| t.total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDivergence {
    pub class_a: usize,
    pub class_b: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_term: f64,
    pub trace_term: f64,
    pub d_joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub format_version: u32,
    pub covariance_normalization: String,
    pub note: String,
    pub pairs: Vec<PairDivergence>,
}

/// D for every pair of classes present in `labels`.
pub fn divergence_report(points: &[Vec<f64>], labels: &[usize]) -> Result<DivergenceReport> {
    if points.len() != labels.len() {
        return invalid("points and labels differ in length");
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let summaries: Vec<Option<GaussianSummary>> = (0..k)
        .map(|c| {
            let class: Vec<Vec<f64>> =
                points.iter().zip(labels).filter(|(_, &y)| y == c).map(|(p, _)| p.clone()).collect();
            (!class.is_empty()).then(|| gaussian_summary(&class)).transpose()
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if let (Some(ga), Some(gb)) = (&summaries[a], &summaries[b]) {
                let t = joint_divergence_terms(ga, gb)?;
                pairs.push(PairDivergence {
                    class_a: a,
                    class_b: b,
                    n_a: ga.n(),
                    n_b: gb.n(),
                    mean_term: t.mean_term,
                    trace_term: t.trace_term,
                    d_joint: t.total,
                });
            }
        }
    }
    Ok(DivergenceReport {
        format_version: FORMAT_VERSION,
        covariance_normalization: "1/n".into(),
        note: "computed on Gaussian summaries without checking any smoothness or diffeomorphism assumption".into(),
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

/// D between bootstrap resamples of size `n` drawn from each cloud,
/// averaged over `reps` repetitions, for every `n` in `sizes`.
pub fn divergence_curve(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if a.is_empty() || b.is_empty() || reps == 0 {
        return invalid("divergence curve needs non-empty clouds and reps >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if n == 0 {
            return invalid("resample size must be >= 1");
        }
        let mut values = Vec::with_capacity(reps);
        for _ in 0..reps {
            let ra: Vec<Vec<f64>> = (0..n).map(|_| a[rng.random_range(0..a.len())].clone()).collect();
            let rb: Vec<Vec<f64>> = (0..n).map(|_| b[rng.random_range(0..b.len())].clone()).collect();
            values.push(joint_divergence(&gaussian_summary(&ra)?, &gaussian_summary(&rb)?)?);
        }
        let mean = values.iter().sum::<f64>() / reps as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / reps as f64;
        out.push(CurvePoint { n, mean, std: var.sqrt() });
    }
    Ok(out)
}
