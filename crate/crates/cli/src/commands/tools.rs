use std::path::Path;

use cbdc_core::conformal::{simulate_coverage, CoverageStats, LogitModel, OracleScores, SampleGenerator, UniformScores};
use cbdc_core::imaging::parse_pgm;
use cbdc_core::topology::{bottleneck_distance, diagram_from_json, diagram_of_image};
use cbdc_core::PersistenceDiagram;

use crate::error::{CliError, CliResult};
use crate::files::{read_input, write_atomic, write_json};
use crate::{BottleneckArgs, Format, Generator, SimulateArgs};

/// A PGM image (by extension or magic number) or a diagram JSON file.
fn load_diagram(path: &Path) -> CliResult<PersistenceDiagram> {
    let text = read_input(path)?;
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) || text.starts_with("P2");
    if is_pgm {
        let img = parse_pgm(&text).map_err(|e| CliError::from(e).at(path))?;
        Ok(diagram_of_image(&img))
    } else {
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::from(e).at(path))?;
        diagram_from_json(&value).map_err(|e| CliError::from(e).at(path))
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn bottleneck(args: &BottleneckArgs) -> CliResult<()> {
    if let Some(d) = args.dim.filter(|d| *d > 1) {
        return Err(CliError::input(format!("--dim must be 0 or 1, got {d}")));
    }
    let (a, b) = (load_diagram(&args.first)?, load_diagram(&args.second)?);
    let dims: Vec<u8> = args.dim.map_or(vec![0, 1], |d| vec![d]);
    let distances: Vec<(u8, f64)> = dims.iter().map(|&d| (d, bottleneck_distance(&a, &b, d))).collect();
    let text = match args.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            for (d, v) in &distances {
                obj.insert(format!("dim{d}"), serde_json::json!(v));
            }
            format!("{}\n", serde_json::to_string_pretty(&obj)?)
        }
        Format::Csv => {
            let mut s = String::from("dim,distance\n");
            for (d, v) in &distances {
                s.push_str(&format!("{d},{v}\n"));
            }
            s
        }
    };
    emit(args.out.as_deref(), &text)
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    if args.classes < 2 {
        return Err(CliError::input("--classes must be at least 2"));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::input(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    if !(args.temperature.is_finite() && args.temperature > 0.0) {
        return Err(CliError::input("--temperature must be positive"));
    }
    let n_classes = args.classes;
    let generator: Box<dyn SampleGenerator> = match args.generator {
        Generator::Uniform => Box::new(UniformScores { n_classes }),
        Generator::Oracle => Box::new(OracleScores { n_classes }),
        Generator::Logit => Box::new(LogitModel {
            n_classes,
            logit_scale: 1.5,
            temperature: args.temperature,
            shift: 0,
        }),
    };
    let stats: CoverageStats =
        simulate_coverage(args.n_cal, args.n_test, args.alpha, args.trials, args.seed, generator.as_ref())?;
    match (args.format, &args.out) {
        (Format::Json, Some(p)) => write_json(p, &stats),
        (Format::Json, None) => emit(None, &format!("{}\n", serde_json::to_string_pretty(&stats)?)),
        (Format::Csv, out) => {
            let mut s = String::from("trial,coverage\n");
            for (t, c) in stats.per_trial.iter().enumerate() {
                s.push_str(&format!("{t},{c}\n"));
            }
            emit(out.as_deref(), &s)
        }
    }
}
