use std::collections::HashMap;

use cbdc_core::classifier::generalization_gap_report;
use cbdc_core::conformal::parse_predictions_csv;
use cbdc_core::manifold::divergence_report;
use cbdc_core::metrics::evaluate;
use cbdc_core::{EvaluationReport, FeatureRecord, FORMAT_VERSION};
use serde::Serialize;

use super::{load_features, load_model, rows_in_split};
use crate::error::{CliError, CliResult};
use crate::files::{check_sibling_manifest, read_artifact, Manifest};
use crate::{EvaluateArgs, Format};

/// Confidence level used for the generalization bound in `gap.json`.
const GAP_DELTA: f64 = 0.05;

/// Adds the run seed to a report that already carries `format_version`.
#[derive(Serialize)]
struct Seeded<'a, T> {
    #[serde(flatten)]
    report: &'a T,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    format_version: u32,
    seed: Option<u64>,
    #[serde(flatten)]
    report: &'a T,
}

fn report_csv(r: &EvaluationReport) -> String {
    let mut out = String::from("metric,value\n");
    let t = &r.table1_schema;
    for (name, v) in [
        ("ACC", t.acc),
        ("AUC", t.auc),
        ("ECE", t.ece),
        ("BS", t.bs),
        ("CC", t.cc),
        ("F1", t.f1),
        ("mean_set_size", r.mean_set_size),
    ] {
        out.push_str(&format!("{name},{v}\n"));
    }
    out
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let mut manifest = Manifest::new("evaluate", None, serde_json::json!({ "bins": args.bins }));
    let upstream = check_sibling_manifest(&args.predictions)?;
    manifest.seed = upstream.as_ref().and_then(|m| m.get("seed")).and_then(serde_json::Value::as_u64);
    check_sibling_manifest(&args.features)?;
    let text = read_artifact(&args.predictions)?;
    manifest.input(&args.predictions, text.as_bytes());
    let predictions = parse_predictions_csv(&text).map_err(|e| CliError::from(e).at(&args.predictions))?;
    if predictions.is_empty() {
        return Err(CliError::input("predictions file has no rows").at(&args.predictions));
    }

    let (_, rows) = load_features(&args.features, &mut manifest)?;
    let labels_by_id: HashMap<&str, Option<usize>> =
        rows.iter().map(|r| (r.id.as_str(), r.record.label)).collect();
    let labels = predictions
        .iter()
        .map(|p| match labels_by_id.get(p.sample_id.as_str()) {
            Some(Some(y)) => Ok(*y),
            Some(None) => Err(CliError::input(format!("sample {} has no label", p.sample_id))),
            None => Err(CliError::input(format!("sample {} is not in the feature table", p.sample_id))),
        })
        .collect::<CliResult<Vec<usize>>>()?;
    let posteriors: Vec<_> = predictions.iter().map(|p| p.posterior.clone()).collect();
    let sets: Vec<_> = predictions.iter().map(|p| p.set.clone()).collect();
    let report = evaluate(&posteriors, &sets, &labels, args.bins)?;

    if let Some(model_path) = &args.model {
        let model = load_model(model_path, &mut manifest)?;
        manifest.seed = Some(model.config.seed);
        let pick = |split: &str| -> Vec<FeatureRecord> {
            rows_in_split(&rows, split).iter().map(|r| r.record.clone()).collect()
        };
        let (train, test) = (pick("train"), pick("test"));
        if !train.is_empty() && !test.is_empty() {
            let gap = generalization_gap_report(&model, &train, &test, &model.config, GAP_DELTA)?;
            let stamped = Versioned {
                format_version: FORMAT_VERSION,
                seed: manifest.seed,
                report: &gap,
            };
            manifest.emit_json(&args.out.join("gap.json"), &stamped)?;
        } else {
            log::warn!("feature table lacks train or test rows; skipping gap.json");
        }
        let (points, point_labels): (Vec<Vec<f64>>, Vec<usize>) = rows
            .iter()
            .filter_map(|r| r.record.label.map(|y| (r, y)))
            .map(|(r, y)| Ok((model.embed(&r.record.values())?, y)))
            .collect::<CliResult<Vec<_>>>()?
            .into_iter()
            .unzip();
        let divergence = divergence_report(&points, &point_labels)?;
        let stamped = Seeded {
            report: &divergence,
            seed: manifest.seed,
        };
        manifest.emit_json(&args.out.join("divergence.json"), &stamped)?;
    }

    match args.format {
        Format::Json => manifest.emit_json(
            &args.out.join("report.json"),
            &Seeded {
                report: &report,
                seed: manifest.seed,
            },
        )?,
        Format::Csv => manifest.emit(&args.out.join("report.csv"), report_csv(&report).as_bytes())?,
    }
    manifest.finish(&args.out)?;
    Ok(())
}
