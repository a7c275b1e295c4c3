use crate::error::{Error, Result};

/// A differentiable objective over a flat parameter vector.
pub trait Objective {
    fn value(&self, theta: &[f64]) -> f64;
    fn gradient(&self, theta: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdSettings {
    pub step: f64,
    pub epochs: usize,
    /// Step halvings allowed per epoch before giving up.
    pub max_halvings: u32,
}

impl GdSettings {
    pub fn new(step: f64, epochs: usize) -> Self {
        Self {
            step,
            epochs,
            max_halvings: 30,
        }
    }
}

/// Iterates `θ_1..θ_T` (the start point is not included) with their losses.
#[derive(Debug, Clone, PartialEq)]
pub struct GdRun {
    pub iterates: Vec<Vec<f64>>,
    pub losses: Vec<f64>,
    pub final_step: f64,
}

impl GdRun {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `‖θ_t − θ_T‖` for every recorded iterate.
    pub fn distances_to_final(&self) -> Vec<f64> {
        let last = self.last();
        self.iterates
            .iter()
            .map(|t| {
                t.iter()
                    .zip(last)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

/// Full-batch gradient descent `θ ← θ − η ∇L(θ)`.
///
/// If a step would increase the loss, `η` is halved (and kept halved for the
/// remaining epochs); more than `max_halvings` halvings in one epoch is
/// reported as divergence.
pub fn gradient_descent<O: Objective + ?Sized>(
    objective: &O,
    start: &[f64],
    settings: GdSettings,
) -> Result<GdRun> {
    let mut theta = start.to_vec();
    let mut loss = objective.value(&theta);
    let mut step = settings.step;
    let mut run = GdRun {
        iterates: Vec::with_capacity(settings.epochs),
        losses: Vec::with_capacity(settings.epochs),
        final_step: step,
    };
    for epoch in 0..settings.epochs {
        let grad = objective.gradient(&theta);
        let mut halvings = 0;
        loop {
            let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
            let value = objective.value(&candidate);
            if value <= loss {
                theta = candidate;
                loss = value;
                break;
            }
            if halvings == settings.max_halvings {
                return Err(Error::Optimization(format!(
                    "loss still increasing after {halvings} step halvings at epoch {epoch}"
                )));
            }
            step /= 2.0;
            halvings += 1;
        }
        run.iterates.push(theta.clone());
        run.losses.push(loss);
    }
    run.final_step = step;
    Ok(run)
}

/// `L(θ) = ½ μ ‖θ‖²`, whose gradient step is exactly `θ ← (1 − ημ) θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHarness {
    pub mu: f64,
}

impl Objective for QuadraticHarness {
    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * self.mu * theta.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().map(|v| self.mu * v).collect()
    }
}
