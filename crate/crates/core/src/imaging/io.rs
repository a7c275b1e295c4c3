//! Plain PGM (P2) and CSV grid interchange.

use std::fmt::Write as _;
use std::path::Path;

use super::GrayscaleImage;
use crate::error::{Error, Result};

const MAXVAL: u32 = 255;

/// Serializes as plain PGM with maxval 255; each intensity is stored as
/// `round(v * 255)`.
pub fn to_pgm_string(img: &GrayscaleImage) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "P2");
    let _ = writeln!(out, "{} {}", img.width(), img.height());
    let _ = writeln!(out, "{MAXVAL}");
    for row in img.intensities().chunks(img.width()) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v * MAXVAL as f64).round() as u32).to_string())
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Parses plain PGM. Intensities are returned as `value / maxval`.
pub fn parse_pgm(text: &str) -> Result<GrayscaleImage> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let magic = tokens.next().ok_or_else(|| Error::Parse("empty PGM".into()))?;
    if magic != "P2" {
        return Err(Error::Parse(format!("expected P2 magic, found {magic:?}")));
    }
    let mut header = |name: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {name}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {name}: {e}")))
    };
    let width = header("width")?;
    let height = header("height")?;
    let maxval = header("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("maxval {maxval} out of range")));
    }
    let values = tokens
        .map(|t| {
            let v: usize = t
                .parse()
                .map_err(|e| Error::Parse(format!("bad pixel {t:?}: {e}")))?;
            if v > maxval {
                return Err(Error::Parse(format!("pixel {v} exceeds maxval {maxval}")));
            }
            Ok(v as f64 / maxval as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != width * height {
        return Err(Error::Parse(format!(
            "expected {} pixels, found {}",
            width * height,
            values.len()
        )));
    }
    GrayscaleImage::new(width, height, values)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayscaleImage> {
    parse_pgm(&std::fs::read_to_string(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayscaleImage) -> Result<()> {
    std::fs::write(path, to_pgm_string(img))?;
    Ok(())
}

/// Reads rows of comma-separated reals into an image.
pub fn read_csv_grid(text: &str) -> Result<GrayscaleImage> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad cell {c:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GrayscaleImage::from_rows(&rows)
}
