//! Shared fixtures for the criterion benches.

use cbdc_core::imaging::generate_synthetic;
use cbdc_core::{GrayscaleImage, SyntheticConfig};

/// A deterministic labeled corpus of `n` images with side `side`.
pub fn corpus(n: usize, side: usize) -> Vec<(GrayscaleImage, usize)> {
    generate_synthetic(&SyntheticConfig {
        image_side: side,
        n_samples: n,
        seed: 11,
        ..SyntheticConfig::default()
    })
    .expect("valid bench corpus")
}

/// One noisy ring image of side `side`.
pub fn ring(side: usize) -> GrayscaleImage {
    corpus(2, side)
        .into_iter()
        .find(|(_, y)| *y == 1)
        .map(|(img, _)| img)
        .expect("corpus has a ring")
}
