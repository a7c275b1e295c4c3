use std::fmt::Write as _;

use cbdc_core::imaging::{generate_synthetic, to_pgm_string, SyntheticConfig};

use crate::error::{CliError, CliResult};
use crate::files::{read_input, Manifest};
use crate::GenerateArgs;

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => SyntheticConfig::parse(&read_input(path)?).map_err(|e| CliError::from(e).at(path))?,
        None => SyntheticConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let data = generate_synthetic(&cfg)?;

    let mut manifest = Manifest::new("generate", Some(cfg.seed), serde_json::to_value(&cfg)?);
    if let Some(path) = &args.config {
        manifest.input(path, read_input(path)?.as_bytes());
    }
    let width = data.len().saturating_sub(1).to_string().len().max(4);
    let mut labels = String::from("id,label\n");
    for (i, (img, y)) in data.iter().enumerate() {
        let id = format!("img_{i:0width$}");
        manifest.emit(&args.out.join("images").join(format!("{id}.pgm")), to_pgm_string(img).as_bytes())?;
        let _ = writeln!(labels, "{id},{y}");
    }
    manifest.emit(&args.out.join("labels.csv"), labels.as_bytes())?;
    manifest.finish(&args.out)?;
    Ok(())
}
