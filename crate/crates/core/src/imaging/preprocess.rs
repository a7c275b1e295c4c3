use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GrayscaleImage;
use crate::error::{invalid, Result};

/// Maps the intensities of `src` onto the empirical distribution of
/// `reference` by quantile mapping.
///
/// Each source pixel gets its average rank among the source intensities
/// (ties share a rank), which is turned into a quantile in `[0, 1]` and read
/// off the sorted reference intensities with linear interpolation.
pub fn histogram_match(src: &GrayscaleImage, reference: &GrayscaleImage) -> Result<GrayscaleImage> {
    if src.is_empty() || reference.is_empty() {
        return invalid("histogram matching needs non-empty images");
    }
    let n = src.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| src.intensities[a].total_cmp(&src.intensities[b]));

    let mut target: Vec<f64> = reference.intensities.clone();
    target.sort_by(f64::total_cmp);
    let m = target.len();
    let lookup = |u: f64| -> f64 {
        let pos = u * (m - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(m - 1);
        let frac = pos - lo as f64;
        target[lo] + (target[hi] - target[lo]) * frac
    };

    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let value = src.intensities[order[start]];
        let mut end = start + 1;
        while end < n && src.intensities[order[end]] == value {
            end += 1;
        }
        // average 0-based rank of the tie group
        let rank = (start + end - 1) as f64 / 2.0;
        let u = if n == 1 { 0.5 } else { rank / (n - 1) as f64 };
        let mapped = lookup(u).clamp(0.0, 1.0);
        for &idx in &order[start..end] {
            out[idx] = mapped;
        }
        start = end;
    }
    Ok(GrayscaleImage::from_raw_unchecked(src.width, src.height, out))
}

/// Rotation, flips and photometric jitter applied by [`augment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub rotation_quarter_turns: u8,
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
    pub photometric_jitter_amplitude: f64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self::identity()
    }
}

impl AugmentSpec {
    pub const MAX_JITTER: f64 = 0.5;

    pub fn new(
        rotation_quarter_turns: u8,
        flip_horizontal: bool,
        flip_vertical: bool,
        photometric_jitter_amplitude: f64,
    ) -> Result<Self> {
        let spec = Self {
            rotation_quarter_turns,
            flip_horizontal,
            flip_vertical,
            photometric_jitter_amplitude,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity() -> Self {
        Self {
            rotation_quarter_turns: 0,
            flip_horizontal: false,
            flip_vertical: false,
            photometric_jitter_amplitude: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rotation_quarter_turns > 3 {
            return invalid(format!(
                "rotation_quarter_turns must be in 0..=3, got {}",
                self.rotation_quarter_turns
            ));
        }
        let a = self.photometric_jitter_amplitude;
        if !(0.0..=Self::MAX_JITTER).contains(&a) {
            return invalid(format!("jitter amplitude must be in [0, 0.5], got {a}"));
        }
        Ok(())
    }
}

/// One clockwise quarter turn: `[[a, b], [c, d]]` becomes `[[c, a], [d, b]]`.
fn rotate_clockwise(img: &GrayscaleImage) -> GrayscaleImage {
    let (w, h) = (img.width, img.height);
    // output is h wide and w tall
    let mut out = Vec::with_capacity(w * h);
    for r in 0..w {
        for c in 0..h {
            out.push(img.get(r, h - 1 - c));
        }
    }
    GrayscaleImage::from_raw_unchecked(h, w, out)
}

fn flip_horizontal(img: &GrayscaleImage) -> GrayscaleImage {
    let w = img.width;
    let mut out = img.intensities.clone();
    for row in out.chunks_mut(w) {
        row.reverse();
    }
    GrayscaleImage::from_raw_unchecked(w, img.height, out)
}

fn flip_vertical(img: &GrayscaleImage) -> GrayscaleImage {
    let w = img.width;
    let out: Vec<f64> = img
        .intensities
        .chunks(w)
        .rev()
        .flatten()
        .copied()
        .collect();
    GrayscaleImage::from_raw_unchecked(w, img.height, out)
}

/// The pixel permutation part of `spec`: rotation, then horizontal flip,
/// then vertical flip.
pub fn geometric_part(img: &GrayscaleImage, spec: &AugmentSpec) -> Result<GrayscaleImage> {
    spec.validate()?;
    let mut out = img.clone();
    for _ in 0..spec.rotation_quarter_turns {
        out = rotate_clockwise(&out);
    }
    if spec.flip_horizontal {
        out = flip_horizontal(&out);
    }
    if spec.flip_vertical {
        out = flip_vertical(&out);
    }
    Ok(out)
}

/// Applies [`geometric_part`] and then adds i.i.d. uniform noise in
/// `[-a, a]` per pixel, clamped to `[0, 1]`. Deterministic in `seed`.
pub fn augment(img: &GrayscaleImage, spec: &AugmentSpec, seed: u64) -> Result<GrayscaleImage> {
    let mut out = geometric_part(img, spec)?;
    let a = spec.photometric_jitter_amplitude;
    if a > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut out.intensities {
            *v = (*v + rng.random_range(-a..=a)).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, v: &[f64]) -> GrayscaleImage {
        GrayscaleImage::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn histogram_match_identity() {
        let src = img(3, 2, &[0.1, 0.5, 0.5, 0.9, 0.3, 0.0]);
        let out = histogram_match(&src, &src).unwrap();
        let tol = 1.0 / 6.0;
        assert!(out.sup_distance(&src).unwrap() <= tol);
        assert_eq!(out, src);
    }

    #[test]
    fn histogram_match_constant_images() {
        let src = GrayscaleImage::filled(4, 4, 0.3).unwrap();
        let reference = GrayscaleImage::filled(3, 5, 0.7).unwrap();
        let out = histogram_match(&src, &reference).unwrap();
        assert!(out.intensities().iter().all(|&v| v == 0.7));
        assert_eq!((out.width(), out.height()), (4, 4));
    }

    #[test]
    fn histogram_match_two_points() {
        let out = histogram_match(&img(2, 1, &[0.0, 1.0]), &img(2, 1, &[0.2, 0.8])).unwrap();
        assert_eq!(out.intensities(), &[0.2, 0.8]);
        // order follows the source ranks
        let out = histogram_match(&img(2, 1, &[1.0, 0.0]), &img(2, 1, &[0.8, 0.2])).unwrap();
        assert_eq!(out.intensities(), &[0.8, 0.2]);
    }

    #[test]
    fn quarter_turn() {
        let (a, b, c, d) = (0.1, 0.2, 0.3, 0.4);
        let spec = AugmentSpec::new(1, false, false, 0.0).unwrap();
        let out = augment(&img(2, 2, &[a, b, c, d]), &spec, 0).unwrap();
        assert_eq!(out.intensities(), &[c, a, d, b]);
    }

    #[test]
    fn rotation_of_non_square_swaps_dims() {
        let src = img(3, 2, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        let spec = AugmentSpec::new(1, false, false, 0.0).unwrap();
        let out = augment(&src, &spec, 0).unwrap();
        assert_eq!((out.width(), out.height()), (2, 3));
        assert_eq!(out.intensities(), &[0.3, 0.0, 0.4, 0.1, 0.5, 0.2]);
        let four = AugmentSpec::new(3, false, false, 0.0).unwrap();
        assert_eq!(augment(&out, &four, 0).unwrap(), src);
    }

    #[test]
    fn flips() {
        let src = img(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let h = AugmentSpec::new(0, true, false, 0.0).unwrap();
        let v = AugmentSpec::new(0, false, true, 0.0).unwrap();
        assert_eq!(augment(&src, &h, 0).unwrap().intensities(), &[0.2, 0.1, 0.4, 0.3]);
        assert_eq!(augment(&src, &v, 0).unwrap().intensities(), &[0.3, 0.4, 0.1, 0.2]);
    }

    #[test]
    fn identity_spec_is_exact() {
        let src = img(3, 1, &[0.25, 0.5, 0.75]);
        assert_eq!(augment(&src, &AugmentSpec::identity(), 9).unwrap(), src);
    }

    #[test]
    fn jitter_is_bounded_and_seeded() {
        let src = img(4, 4, &[0.5; 16]);
        let spec = AugmentSpec::new(2, true, true, 0.1).unwrap();
        let a = augment(&src, &spec, 5).unwrap();
        let b = augment(&src, &spec, 5).unwrap();
        assert_eq!(a, b);
        let geo = geometric_part(&src, &spec).unwrap();
        assert!(a.sup_distance(&geo).unwrap() <= 0.1);
        assert_ne!(a, augment(&src, &spec, 6).unwrap());
    }

    #[test]
    fn spec_validation() {
        assert!(AugmentSpec::new(4, false, false, 0.0).is_err());
        assert!(AugmentSpec::new(0, false, false, 0.6).is_err());
        assert!(AugmentSpec::new(0, false, false, -0.1).is_err());
    }
}
