use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cbdc_core::imaging::{parse_pgm, stratified_split, SplitFractions};
use cbdc_core::pipeline::{augmented_pairs, featurize_batch, features_csv, FeatureRow};
use cbdc_core::{GrayscaleImage, TrainingConfig};

use crate::error::{CliError, CliResult};
use crate::files::{read_input, Manifest};
use crate::FeaturizeArgs;

fn list_images(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::input(format!("cannot list {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::input(format!("no .pgm images in {}", dir.display())));
    }
    Ok(paths)
}

fn find_labels(args: &FeaturizeArgs) -> Option<PathBuf> {
    if let Some(p) = &args.labels {
        return Some(p.clone());
    }
    let inside = args.images.join("labels.csv");
    let beside = args.images.parent().map(|d| d.join("labels.csv"));
    [Some(inside), beside].into_iter().flatten().find(|p| p.exists())
}

fn read_labels(path: &Path, text: &str) -> CliResult<BTreeMap<String, usize>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(e.to_string()).at(path))?;
        let (Some(id), Some(label)) = (rec.get(0), rec.get(1)) else {
            return Err(CliError::input(format!("line {}: expected id,label", i + 2)).at(path));
        };
        let label = label
            .trim()
            .parse::<usize>()
            .map_err(|e| CliError::input(format!("line {}: label {label:?}: {e}", i + 2)).at(path))?;
        out.insert(id.trim().to_string(), label);
    }
    Ok(out)
}

pub fn run(args: &FeaturizeArgs) -> CliResult<()> {
    if args.thresholds < 2 {
        return Err(CliError::input("--thresholds must be >= 2"));
    }
    let [train, cal, test] = args.split[..] else {
        return Err(CliError::input("--split takes three fractions: train,cal,test"));
    };
    let fractions = SplitFractions::new(train, cal, test)?;
    let training_cfg: TrainingConfig = match &args.config {
        Some(p) => serde_json::from_str(&read_input(p)?).map_err(|e| CliError::from(e).at(p))?,
        None => TrainingConfig::default(),
    };

    let mut manifest = Manifest::new(
        "featurize",
        Some(args.seed),
        serde_json::json!({
            "thresholds": args.thresholds,
            "split": args.split,
            "augment_spec": training_cfg.augment_spec,
        }),
    );
    let paths = list_images(&args.images)?;
    let mut ids = Vec::with_capacity(paths.len());
    let mut images: Vec<GrayscaleImage> = Vec::with_capacity(paths.len());
    for p in &paths {
        let text = read_input(p)?;
        images.push(parse_pgm(&text).map_err(|e| CliError::input(format!("corrupt image: {e}")).at(p))?);
        manifest.input(p, text.as_bytes());
        ids.push(p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string());
    }

    let labels: Option<Vec<usize>> = match find_labels(args) {
        Some(path) => {
            let text = read_input(&path)?;
            manifest.input(&path, text.as_bytes());
            let table = read_labels(&path, &text)?;
            let labels = ids
                .iter()
                .map(|id| {
                    table
                        .get(id)
                        .copied()
                        .ok_or_else(|| CliError::input(format!("no label for image {id}")).at(&path))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Some(labels)
        }
        None => None,
    };

    let mut splits: Vec<Option<&str>> = vec![None; ids.len()];
    if let Some(labels) = &labels {
        let indexed: Vec<(usize, usize)> = labels.iter().copied().enumerate().collect();
        let parts = stratified_split(&indexed, fractions, args.seed)?;
        for (name, part) in [("train", &parts.train), ("cal", &parts.cal), ("test", &parts.test)] {
            for (i, _) in part {
                splits[*i] = Some(name);
            }
        }
    }

    let inputs: Vec<(GrayscaleImage, Option<usize>)> = images
        .iter()
        .enumerate()
        .map(|(i, img)| (img.clone(), labels.as_ref().map(|l| l[i])))
        .collect();
    let records = featurize_batch(&inputs, args.thresholds)?;
    let rows: Vec<FeatureRow> = records
        .into_iter()
        .enumerate()
        .map(|(i, record)| FeatureRow {
            id: ids[i].clone(),
            split: splits[i].map(String::from),
            record,
        })
        .collect();

    // consistency pairs come from training images only
    let pair_idx: Vec<usize> = (0..ids.len())
        .filter(|&i| labels.is_none() || splits[i] == Some("train"))
        .collect();
    let pair_images: Vec<GrayscaleImage> = pair_idx.iter().map(|&i| images[i].clone()).collect();
    let pairs = augmented_pairs(&pair_images, &training_cfg.augment_spec, args.thresholds, args.seed)?;
    let pair_rows: Vec<FeatureRow> = pairs
        .into_iter()
        .zip(&pair_idx)
        .flat_map(|((orig, aug), &i)| {
            [
                FeatureRow {
                    id: ids[i].clone(),
                    split: Some("pair".into()),
                    record: orig,
                },
                FeatureRow {
                    id: format!("{}~aug", ids[i]),
                    split: Some("pair".into()),
                    record: aug,
                },
            ]
        })
        .collect();

    manifest.emit(&args.out.join("features.csv"), features_csv(&rows, args.thresholds)?.as_bytes())?;
    manifest.emit(&args.out.join("pairs.csv"), features_csv(&pair_rows, args.thresholds)?.as_bytes())?;
    manifest.finish(&args.out)?;
    Ok(())
}
