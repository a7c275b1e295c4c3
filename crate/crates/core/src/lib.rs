//! Topological image features with bottleneck stability, a strongly convex
//! ensemble classifier, split conformal prediction and calibration metrics.
//!
//! The modules mirror the processing chain:
//!
//! * [`imaging`]: grayscale images, histogram matching, augmentation,
//!   stratified splits and a synthetic blob/ring generator.
//! * [`topology`]: cubical lower-star filtrations, persistence by boundary
//!   matrix reduction and by union-find, Vietoris–Rips H0, bottleneck
//!   distance and fixed-length diagram vectorization.
//! * [`classifier`]: composite objective (cross-entropy + augmentation
//!   consistency + Gaussian prior), gradient descent with a contraction
//!   trace, bootstrap ensembles and a Rademacher generalization report.
//! * [`conformal`]: conformity scores, finite-sample calibrated thresholds,
//!   prediction sets and coverage simulation.
//! * [`metrics`]: accuracy, macro F1, one-vs-rest AUC, ECE, Brier, coverage.
//! * [`manifold`]: Gaussian class summaries and the Bures–Wasserstein
//!   divergence between them.
//! * [`pipeline`]: glue that turns images into feature records.

pub mod classifier;
pub mod conformal;
pub mod error;
pub mod imaging;
pub mod manifold;
pub mod metrics;
pub mod pipeline;
pub mod topology;

pub use classifier::{
    EnsembleModel, FeatureRecord, PosteriorPredictive, TrainingConfig, Weights,
};
pub use conformal::{ConformalCalibrator, PredictionSet};
pub use error::{Error, Result};
pub use imaging::{AugmentSpec, GrayscaleImage, SyntheticConfig};
pub use manifold::GaussianSummary;
pub use metrics::EvaluationReport;
pub use topology::{Bar, CubicalComplex, PersistenceDiagram, PointCloud, TopoFeatureVector};

/// Version tag carried by every serialized artifact.
pub const FORMAT_VERSION: u32 = 1;
