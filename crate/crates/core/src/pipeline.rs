//! Image-to-feature glue and the feature table format.

use rayon::prelude::*;

use crate::classifier::FeatureRecord;
use crate::error::{invalid, Error, Result};
use crate::imaging::{augment, AugmentSpec, GrayscaleImage};
use crate::topology::{diagram_of_image, feature_header, vectorize};

pub const INTENSITY_COLUMNS: [&str; 4] = ["intensity_mean", "intensity_std", "intensity_min", "intensity_max"];

pub fn featurize_image(img: &GrayscaleImage, thresholds: usize, label: Option<usize>) -> Result<FeatureRecord> {
    let topo = vectorize(&diagram_of_image(img), thresholds)?;
    FeatureRecord::new(topo, img.intensity_stats(), label)
}

/// Featurizes in parallel; output order follows the input.
pub fn featurize_batch(images: &[(GrayscaleImage, Option<usize>)], thresholds: usize) -> Result<Vec<FeatureRecord>> {
    images
        .par_iter()
        .map(|(img, y)| featurize_image(img, thresholds, *y))
        .collect()
}

/// Features of each image and of its augmented copy. Image `i` is jittered
/// with seed `seed + i`.
pub fn augmented_pairs(
    images: &[GrayscaleImage],
    spec: &AugmentSpec,
    thresholds: usize,
    seed: u64,
) -> Result<Vec<(FeatureRecord, FeatureRecord)>> {
    spec.validate()?;
    images
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let aug = augment(img, spec, seed.wrapping_add(i as u64))?;
            Ok((featurize_image(img, thresholds, None)?, featurize_image(&aug, thresholds, None)?))
        })
        .collect()
}

/// One row of the feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub split: Option<String>,
    pub record: FeatureRecord,
}

pub fn feature_table_header(thresholds: usize) -> Vec<String> {
    let mut h = vec!["id".to_string(), "label".to_string(), "split".to_string()];
    h.extend(feature_header(thresholds));
    h.extend(INTENSITY_COLUMNS.map(String::from));
    h
}

/// CSV with `id, label, split`, the topology columns and the four
/// intensity statistics. Missing labels and splits are empty cells.
pub fn features_csv(rows: &[FeatureRow], thresholds: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(feature_table_header(thresholds)).map_err(csv_err)?;
    for r in rows {
        if r.record.topo.thresholds != thresholds {
            return invalid(format!("row {} was featurized with a different threshold count", r.id));
        }
        let mut rec = vec![
            r.id.clone(),
            r.record.label.map(|y| y.to_string()).unwrap_or_default(),
            r.split.clone().unwrap_or_default(),
        ];
        rec.extend(r.record.values().iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a table written by [`features_csv`] and returns the threshold
/// count inferred from the header together with the rows.
pub fn parse_features_csv(text: &str) -> Result<(usize, Vec<FeatureRow>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("feature table header: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    // 3 key columns + 8 + 2T topology columns + 4 intensity columns
    let width = header.len();
    if width < 3 + 8 + 4 + 4 || !(width - 15).is_multiple_of(2) {
        return Err(Error::Parse(format!("feature table header has {width} columns")));
    }
    let thresholds = (width - 15) / 2;
    if header != feature_table_header(thresholds) {
        return Err(Error::Parse("feature table header does not match the expected layout".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("feature table line {line}: {e}")))?;
        let label = match &rec[1] {
            "" => None,
            s => Some(
                s.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("feature table line {line}: label {s:?}: {e}")))?,
            ),
        };
        let values: Vec<f64> = (3..width)
            .map(|j| {
                rec[j]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("feature table line {line}, column {}: {e}", header[j])))
            })
            .collect::<Result<_>>()?;
        let record = FeatureRecord::from_values(&values, thresholds, label)
            .map_err(|e| Error::Parse(format!("feature table line {line}: {e}")))?;
        rows.push(FeatureRow {
            id: rec[0].to_string(),
            split: (!rec[2].is_empty()).then(|| rec[2].to_string()),
            record,
        });
    }
    Ok((thresholds, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_row() {
        let img = GrayscaleImage::filled(8, 8, 0.4).unwrap();
        let r = featurize_image(&img, 4, Some(0)).unwrap();
        assert_eq!(r.topo.count(0), 1.0);
        assert_eq!(r.topo.count(1), 0.0);
        for (got, want) in r.intensity_stats.iter().zip([0.4, 0.0, 0.4, 0.4]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn table_round_trip() {
        let img = GrayscaleImage::from_rows(&[vec![0.0, 0.5, 0.2], vec![0.9, 0.1, 0.3], vec![0.4, 0.8, 0.6]]).unwrap();
        let rows = vec![
            FeatureRow {
                id: "a".into(),
                split: Some("train".into()),
                record: featurize_image(&img, 3, Some(1)).unwrap(),
            },
            FeatureRow {
                id: "b".into(),
                split: None,
                record: featurize_image(&img, 3, None).unwrap(),
            },
        ];
        let text = features_csv(&rows, 3).unwrap();
        assert!(text.starts_with("id,label,split,h0_count,"));
        let (t, parsed) = parse_features_csv(&text).unwrap();
        assert_eq!(t, 3);
        assert_eq!(parsed, rows);
        assert!(features_csv(&rows, 4).is_err());
    }
}
