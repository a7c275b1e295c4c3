//! Probabilistic classifier over topological and intensity features.
//!
//! Each ensemble member is a multinomial logistic model trained by full-batch
//! gradient descent on
//!
//! ```text
//! L(W) = CE(W) + λ1 · mean ‖W x − W x'‖² + λ2 · ½ ‖W‖²
//! ```
//!
//! where `(x, x')` are features of an image and of its augmented copy. The
//! last term makes `L` λ2-strongly convex, so gradient descent with a step
//! below `1 / L_smooth` contracts geometrically; the training trace records
//! the distance of every iterate to the final one.

mod features;
mod loss;
mod model;
mod optimize;
mod theory;

pub use features::{FeatureRecord, PosteriorPredictive};
pub use loss::{composite_gradient, composite_loss, composite_loss_terms, Batch, LossTerms, Weights};
pub use model::{
    predict_posterior, train, ConvergenceTrace, EnsembleModel, Normalizer, TraceEntry,
    TrainingConfig,
};
pub use optimize::{gradient_descent, GdRun, GdSettings, Objective, QuadraticHarness};
pub use theory::{
    generalization_bound, generalization_gap_report, rademacher_bound_linear, GapReport,
};
