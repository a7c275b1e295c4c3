use super::PredictionSet;
use crate::classifier::PosteriorPredictive;
use crate::error::{Error, Result};

/// One line of the predictions file.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub sample_id: String,
    pub posterior: PosteriorPredictive,
    pub set: PredictionSet,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("predictions line {line}: {msg}"))
}

/// CSV with columns `sample_id, argmax_label, set_members, set_size,
/// max_prob` followed by `prob_0 .. prob_{K-1}`. Set members are joined
/// with `;`.
pub fn predictions_csv(rows: &[PredictionRow]) -> Result<String> {
    let k = rows.first().map_or(0, |r| r.posterior.n_classes());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["sample_id", "argmax_label", "set_members", "set_size", "max_prob"]
        .map(String::from)
        .to_vec();
    header.extend((0..k).map(|j| format!("prob_{j}")));
    w.write_record(&header).map_err(|e| Error::Parse(e.to_string()))?;
    for r in rows {
        if r.posterior.n_classes() != k {
            return Err(Error::InvalidInput("rows disagree on the number of classes".into()));
        }
        let members = r.set.labels.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        let mut rec = vec![
            r.sample_id.clone(),
            r.posterior.argmax().to_string(),
            members,
            r.set.len().to_string(),
            r.posterior.max_prob().to_string(),
        ];
        rec.extend(r.posterior.probs().iter().map(f64::to_string));
        w.write_record(&rec).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Inverse of [`predictions_csv`]. Set scores are recomputed from the
/// probabilities; `alpha` is not stored in the file.
pub fn parse_predictions_csv(text: &str) -> Result<Vec<PredictionRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_err(1, e))?.clone();
    let fixed = ["sample_id", "argmax_label", "set_members", "set_size", "max_prob"];
    if header.len() < fixed.len() + 1 || header.iter().take(fixed.len()).ne(fixed) {
        return Err(parse_err(1, "unexpected header"));
    }
    let k = header.len() - fixed.len();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e))?;
        let num = |j: usize| -> Result<f64> {
            rec[j].parse::<f64>().map_err(|e| parse_err(line, format!("column {}: {e}", &header[j])))
        };
        let probs: Vec<f64> = (fixed.len()..fixed.len() + k).map(num).collect::<Result<_>>()?;
        let posterior = PosteriorPredictive::new(probs).map_err(|e| parse_err(line, e))?;
        let mut labels: Vec<usize> = if rec[2].is_empty() {
            Vec::new()
        } else {
            rec[2]
                .split(';')
                .map(|s| s.parse::<usize>().map_err(|e| parse_err(line, format!("set member {s:?}: {e}"))))
                .collect::<Result<_>>()?
        };
        labels.sort_unstable();
        labels.dedup();
        if labels.iter().any(|&y| y >= k) {
            return Err(parse_err(line, "set member out of range"));
        }
        if rec[3].parse::<usize>().ok() != Some(labels.len()) {
            return Err(parse_err(line, "set_size does not match set_members"));
        }
        let scores = posterior.probs().iter().map(|p| (1.0 - p).clamp(0.0, 1.0)).collect();
        rows.push(PredictionRow {
            sample_id: rec[0].to_string(),
            posterior,
            set: PredictionSet {
                labels,
                alpha: None,
                scores,
            },
        });
    }
    Ok(rows)
}
