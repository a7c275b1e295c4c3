pub mod evaluate;
pub mod featurize;
pub mod generate;
pub mod model;
pub mod tools;

use std::path::Path;

use cbdc_core::pipeline::{parse_features_csv, FeatureRow};
use cbdc_core::EnsembleModel;

use crate::error::{CliError, CliResult};
use crate::files::{check_version, read_artifact, Manifest};

/// Reads a feature table produced by `featurize`.
pub(crate) fn load_features(path: &Path, manifest: &mut Manifest) -> CliResult<(usize, Vec<FeatureRow>)> {
    let text = read_artifact(path)?;
    manifest.input(path, text.as_bytes());
    parse_features_csv(&text).map_err(|e| CliError::from(e).at(path))
}

pub(crate) fn load_model(path: &Path, manifest: &mut Manifest) -> CliResult<EnsembleModel> {
    let text = read_artifact(path)?;
    manifest.input(path, text.as_bytes());
    check_version(&text, path)?;
    EnsembleModel::from_json(&text).map_err(|e| CliError::from(e).at(path))
}

/// Rows of `split`, or every row when `split` is `all`.
pub(crate) fn rows_in_split<'a>(rows: &'a [FeatureRow], split: &str) -> Vec<&'a FeatureRow> {
    rows.iter()
        .filter(|r| split == "all" || r.split.as_deref() == Some(split))
        .collect()
}
