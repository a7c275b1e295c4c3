//! Synthetic corpus with known topology.
//!
//! Class 0 is a filled dark disk on a bright background: one dominant
//! sublevel component and no loop. Class `k >= 1` places `k` dark rings with
//! bright holes on a square grid of cells, so every ring contributes one H1
//! bar that is born at the ring intensity and dies when its hole fills at the
//! background intensity.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::split::largest_remainder;
use super::GrayscaleImage;
use crate::error::{invalid, Error, Result};

/// Smallest side length that can host a ring with a hole.
pub const MIN_IMAGE_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub image_side: usize,
    pub n_samples: usize,
    pub class_fractions: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            image_side: 16,
            n_samples: 400,
            class_fractions: vec![0.5, 0.5],
            noise_sigma: 0.03,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn n_classes(&self) -> usize {
        self.class_fractions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_side < MIN_IMAGE_SIDE {
            return invalid(format!(
                "image_side must be >= {MIN_IMAGE_SIDE} to host a ring, got {}",
                self.image_side
            ));
        }
        if self.n_samples < 2 {
            return invalid(format!("n_samples must be >= 2, got {}", self.n_samples));
        }
        if self.class_fractions.len() < 2 {
            return invalid("class_fractions needs at least two classes");
        }
        if self
            .class_fractions
            .iter()
            .any(|f| !(0.0..=1.0).contains(f))
        {
            return invalid(format!(
                "class fractions must lie in [0, 1], got {:?}",
                self.class_fractions
            ));
        }
        let total: f64 = self.class_fractions.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("class fractions must sum to 1, got {total}"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return invalid(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        let k_max = self.n_classes() - 1;
        if ring_cell_side(self.image_side, k_max) < MIN_IMAGE_SIDE {
            return invalid(format!(
                "image_side {} is too small for {k_max} rings (each needs a {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE} cell)",
                self.image_side
            ));
        }
        Ok(())
    }

    /// Parses the flat `key=value` form. Blank lines and `#` comments are
    /// ignored; `class_fractions` is a comma-separated list.
    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| {
                Error::Parse(format!("line {}: bad value for {key}: {e}", lineno + 1))
            };
            match key {
                "image_side" => cfg.image_side = value.parse().map_err(|e| bad(&e))?,
                "n_samples" => cfg.n_samples = value.parse().map_err(|e| bad(&e))?,
                "noise_sigma" => cfg.noise_sigma = value.parse().map_err(|e| bad(&e))?,
                "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
                "class_fractions" => {
                    cfg.class_fractions = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| bad(&e))?
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key {other}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let fractions: Vec<String> = self.class_fractions.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "image_side={}", self.image_side);
        let _ = writeln!(out, "n_samples={}", self.n_samples);
        let _ = writeln!(out, "class_fractions={}", fractions.join(","));
        let _ = writeln!(out, "noise_sigma={}", self.noise_sigma);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }

    /// Accepts either JSON (leading `{`) or the key=value form.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            Self::from_key_value(text)
        }
    }
}

fn grid_columns(rings: usize) -> usize {
    (rings as f64).sqrt().ceil().max(1.0) as usize
}

fn ring_cell_side(side: usize, rings: usize) -> usize {
    side / grid_columns(rings)
}

struct Painter<'a> {
    side: usize,
    pixels: &'a mut [f64],
}

impl Painter<'_> {
    /// Sets every pixel whose center lies within `[r_in, r_out]` of `(cx, cy)`.
    fn annulus(&mut self, cx: f64, cy: f64, r_in: f64, r_out: f64, value: f64) {
        for y in 0..self.side {
            for x in 0..self.side {
                let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
                if d >= r_in && d <= r_out {
                    self.pixels[y * self.side + x] = value;
                }
            }
        }
    }
}

fn render(side: usize, class: usize, noise: &Option<Normal<f64>>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let low = rng.random_range(0.05..0.2);
    let high = rng.random_range(0.75..0.95);
    let mut pixels = vec![high; side * side];
    let mut painter = Painter {
        side,
        pixels: &mut pixels,
    };
    let s = side as f64;
    if class == 0 {
        let cx = s / 2.0 + rng.random_range(-0.5..0.5);
        let cy = s / 2.0 + rng.random_range(-0.5..0.5);
        let r = s * rng.random_range(0.2..0.3);
        painter.annulus(cx, cy, 0.0, r, low);
    } else {
        let cols = grid_columns(class);
        let cell = (side / cols) as f64;
        for ring in 0..class {
            let (gx, gy) = ((ring % cols) as f64, (ring / cols) as f64);
            let cx = (gx + 0.5) * cell + rng.random_range(-0.25..0.25);
            let cy = (gy + 0.5) * cell + rng.random_range(-0.25..0.25);
            let r_out = cell * rng.random_range(0.38..0.44);
            let r_in = cell * rng.random_range(0.15..0.2);
            painter.annulus(cx, cy, r_in, r_out, low);
        }
    }
    if let Some(dist) = noise {
        for v in &mut pixels {
            *v = (*v + dist.sample(rng)).clamp(0.0, 1.0);
        }
    }
    pixels
}

/// Generates `cfg.n_samples` labeled images. Class counts follow
/// `class_fractions` by largest remainder; the label order is a seeded
/// shuffle. Output is a pure function of `cfg`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Vec<(GrayscaleImage, usize)>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let counts = largest_remainder(cfg.n_samples, &cfg.class_fractions);
    let mut labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(class, &n)| std::iter::repeat_n(class, n))
        .collect();
    labels.shuffle(&mut rng);

    let noise = (cfg.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, cfg.noise_sigma).expect("validated sigma"));
    let side = cfg.image_side;
    Ok(labels
        .into_iter()
        .map(|label| {
            let pixels = render(side, label, &noise, &mut rng);
            (GrayscaleImage::from_raw_unchecked(side, side, pixels), label)
        })
        .collect())
}
