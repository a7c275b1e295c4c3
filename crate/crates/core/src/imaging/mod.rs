//! Grayscale images, preprocessing, augmentation and the synthetic corpus.

mod io;
mod preprocess;
mod split;
mod synthetic;

pub use io::{read_csv_grid, read_pgm, write_pgm, parse_pgm, to_pgm_string};
pub use preprocess::{augment, geometric_part, histogram_match, AugmentSpec};
pub use split::{stratified_split, Split, SplitFractions};
pub use synthetic::{generate_synthetic, SyntheticConfig, MIN_IMAGE_SIDE};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Rectangular intensity grid with values in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayscaleImage {
    width: usize,
    height: usize,
    intensities: Vec<f64>,
}

impl GrayscaleImage {
    pub fn new(width: usize, height: usize, intensities: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return invalid(format!("image must be non-empty, got {width}x{height}"));
        }
        if intensities.len() != width * height {
            return invalid(format!(
                "expected {} intensities for a {width}x{height} image, got {}",
                width * height,
                intensities.len()
            ));
        }
        if let Some((i, v)) = intensities
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return invalid(format!("intensity {v} at index {i} outside [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            intensities,
        })
    }

    /// Constant image.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return invalid("ragged rows");
        }
        Self::new(width, height, rows.concat())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    /// Intensity at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.intensities[y * self.width + x]
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Largest absolute pixel difference; `None` when the shapes differ.
    pub fn sup_distance(&self, other: &Self) -> Option<f64> {
        if self.width != other.width || self.height != other.height {
            return None;
        }
        Some(
            self.intensities
                .iter()
                .zip(&other.intensities)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// `[mean, std, min, max]` of the pixel intensities (population std).
    pub fn intensity_stats(&self) -> [f64; 4] {
        let n = self.len() as f64;
        let mean = self.intensities.iter().sum::<f64>() / n;
        let var = self
            .intensities
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / n;
        let min = self.intensities.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self
            .intensities
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        [mean, var.sqrt(), min, max]
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, intensities: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, intensities.len());
        Self {
            width,
            height,
            intensities,
        }
    }
}
