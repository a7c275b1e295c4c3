use std::path::PathBuf;

use cbdc_core::classifier::{predict_posterior, train as fit};
use cbdc_core::conformal::{
    conformity_score, predictions_csv, CalibrationRecord, ConformalCalibrator, PredictionRow, PredictionSet,
};
use cbdc_core::{FeatureRecord, TrainingConfig};

use super::{load_features, load_model, rows_in_split};
use crate::error::{CliError, CliResult};
use crate::files::{check_version, read_artifact, read_input, Manifest};
use crate::{CalibrateArgs, PredictArgs, TrainArgs};

pub fn train(args: &TrainArgs) -> CliResult<()> {
    let mut cfg: TrainingConfig = match &args.config {
        Some(p) => serde_json::from_str(&read_input(p)?).map_err(|e| CliError::from(e).at(p))?,
        None => TrainingConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let mut manifest = Manifest::new("train", Some(cfg.seed), serde_json::to_value(&cfg)?);
    if let Some(p) = &args.config {
        manifest.input(p, read_input(p)?.as_bytes());
    }
    let (_, rows) = load_features(&args.features, &mut manifest)?;
    let has_splits = rows.iter().any(|r| r.split.is_some());
    let records: Vec<FeatureRecord> = rows
        .iter()
        .filter(|r| !has_splits || r.split.as_deref() == Some("train"))
        .map(|r| r.record.clone())
        .collect();
    if records.is_empty() {
        return Err(CliError::input("no training rows in the feature table").at(&args.features));
    }

    let pairs_path: Option<PathBuf> = args.pairs.clone().or_else(|| {
        let p = args.features.with_file_name("pairs.csv");
        p.exists().then_some(p)
    });
    let pairs = match &pairs_path {
        Some(p) => {
            let (_, pair_rows) = load_features(p, &mut manifest)?;
            if pair_rows.len() % 2 != 0 {
                return Err(CliError::input("pairs table has an odd number of rows").at(p));
            }
            pair_rows
                .chunks(2)
                .map(|c| (c[0].record.clone(), c[1].record.clone()))
                .collect()
        }
        None => Vec::new(),
    };

    let (model, trace) = fit(&records, &pairs, &cfg)?;
    manifest.emit(&args.out.join("model.json"), format!("{}\n", model.to_json()?).as_bytes())?;
    manifest.emit(&args.out.join("trace.csv"), trace.to_csv().as_bytes())?;
    manifest.finish(&args.out)?;
    Ok(())
}

fn labeled(records: &[&cbdc_core::pipeline::FeatureRow]) -> CliResult<Vec<(FeatureRecord, usize)>> {
    records
        .iter()
        .map(|r| {
            r.record
                .label
                .map(|y| (r.record.clone(), y))
                .ok_or_else(|| CliError::input(format!("row {} has no label", r.id)))
        })
        .collect()
}

pub fn calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let mut manifest = Manifest::new("calibrate", None, serde_json::json!({ "alpha": args.alpha }));
    let model = load_model(&args.model, &mut manifest)?;
    manifest.seed = Some(model.config.seed);
    let (_, rows) = load_features(&args.features, &mut manifest)?;
    let cal_rows = rows_in_split(&rows, "cal");
    if cal_rows.is_empty() {
        return Err(CliError::input("feature table has no rows in the cal split").at(&args.features));
    }
    let scores = labeled(&cal_rows)?
        .iter()
        .map(|(r, y)| Ok(conformity_score(&predict_posterior(&model, r)?, *y)?))
        .collect::<CliResult<Vec<f64>>>()?;
    let cal = ConformalCalibrator::calibrate(&scores, args.alpha)?;
    manifest.emit_json(&args.out.join("calibration.json"), &cal.record(Some(model.config.seed)))?;
    manifest.finish(&args.out)?;
    Ok(())
}

pub fn predict(args: &PredictArgs) -> CliResult<()> {
    let mut manifest = Manifest::new(
        "predict",
        None,
        serde_json::json!({ "split": args.split, "argmax_only": args.argmax_only }),
    );
    let model = load_model(&args.model, &mut manifest)?;
    manifest.seed = Some(model.config.seed);
    let calibration = match (&args.calibration, args.argmax_only) {
        (Some(p), false) => {
            let text = read_artifact(p)?;
            manifest.input(p, text.as_bytes());
            check_version(&text, p)?;
            Some(CalibrationRecord::from_json(&text).map_err(|e| CliError::from(e).at(p))?)
        }
        (None, false) => return Err(CliError::state("predict needs --calibration (or --argmax-only)")),
        (_, true) => None,
    };
    if let Some(c) = &calibration {
        manifest.config["alpha"] = serde_json::json!(c.alpha);
        manifest.config["q"] = serde_json::json!(c.q);
    }
    let (_, rows) = load_features(&args.features, &mut manifest)?;
    let selected = rows_in_split(&rows, &args.split);
    if selected.is_empty() {
        return Err(CliError::input(format!("no rows in split {:?}", args.split)).at(&args.features));
    }
    let out_rows = selected
        .iter()
        .map(|r| {
            let posterior = predict_posterior(&model, &r.record)?;
            let set = match &calibration {
                Some(c) => PredictionSet::from_threshold(&posterior, c.q, Some(c.alpha)),
                None => PredictionSet::argmax_only(&posterior),
            };
            Ok(PredictionRow {
                sample_id: r.id.clone(),
                posterior,
                set,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    manifest.emit(&args.out.join("predictions.csv"), predictions_csv(&out_rows)?.as_bytes())?;
    manifest.finish(&args.out)?;
    Ok(())
}
