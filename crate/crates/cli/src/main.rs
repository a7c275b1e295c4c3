mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "cbdc", version, about = "Topological features, conformal prediction and calibration metrics")]
struct Cli {
    /// Caps the worker threads used for batch parallelism.
    #[arg(long, env = "CBDC_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic blob/ring corpus as PGM images with labels.
    Generate(GenerateArgs),
    /// Compute topological and intensity features for a directory of PGM images.
    Featurize(FeaturizeArgs),
    /// Train the ensemble classifier on the train split of a feature table.
    Train(TrainArgs),
    /// Compute the conformal threshold on the calibration split.
    Calibrate(CalibrateArgs),
    /// Write posteriors and prediction sets for one split.
    Predict(PredictArgs),
    /// Score predictions against labels.
    Evaluate(EvaluateArgs),
    /// Bottleneck distance between two images or two diagram files.
    Bottleneck(BottleneckArgs),
    /// Monte Carlo check of split conformal coverage.
    SimulateCoverage(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Synthetic corpus config (key = value lines or JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Directory of `.pgm` images.
    #[arg(long)]
    pub images: PathBuf,
    /// `id,label` CSV; defaults to `labels.csv` next to or inside the image directory.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of Betti-curve thresholds.
    #[arg(long, default_value_t = 16)]
    pub thresholds: usize,
    /// Training config whose `augment_spec` drives the consistency pairs.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for the stratified split and the augmentation jitter.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train, calibration and test fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.25])]
    pub split: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Augmented pairs table; defaults to `pairs.csv` beside the features.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Training config JSON; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Required unless `--argmax-only` is given.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub features: PathBuf,
    /// Split to predict, or `all`.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Emit `{argmax}` singletons instead of conformal sets.
    #[arg(long)]
    pub argmax_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    /// Feature table supplying the labels.
    #[arg(long)]
    pub features: PathBuf,
    /// Adds the generalization-gap and class-divergence diagnostics.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BottleneckArgs {
    /// PGM image or diagram JSON.
    pub first: PathBuf,
    /// PGM image or diagram JSON.
    pub second: PathBuf,
    /// Restrict to one homology dimension.
    #[arg(long)]
    pub dim: Option<u8>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Uniform,
    Oracle,
    Logit,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 99)]
    pub n_cal: usize,
    #[arg(long, default_value_t = 100)]
    pub n_test: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Generator::Uniform)]
    pub generator: Generator,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Logit generator: the model reports softmax(temperature * z).
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| error::CliError::input(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Generate(a) => commands::generate::run(&a),
        Command::Featurize(a) => commands::featurize::run(&a),
        Command::Train(a) => commands::model::train(&a),
        Command::Calibrate(a) => commands::model::calibrate(&a),
        Command::Predict(a) => commands::model::predict(&a),
        Command::Evaluate(a) => commands::evaluate::run(&a),
        Command::Bottleneck(a) => commands::tools::bottleneck(&a),
        Command::SimulateCoverage(a) => commands::tools::simulate(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
