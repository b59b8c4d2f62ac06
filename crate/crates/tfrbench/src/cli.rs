//! The `tfrbench` command: `extract`, `train`, `evaluate` and `render`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tfrbench_core::feature::TransformSpec;
use tfrbench_core::nn::{Adam, Architecture, FilterShape, ModelConfig, TrainConfig};

use crate::error::Result;
use crate::manifest::Manifest;
use crate::pipeline::{self, TrainJob};
use crate::report::to_json_bytes;
use crate::{png_io, tfr1};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tfrbench", version, about = "Time-frequency representation benchmark for sound classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one TFR1 feature file per manifest entry.
    Extract(ExtractArgs),
    /// Cross-validate a model on extracted features and write a report.
    Train(TrainArgs),
    /// Compare reports with ANOVA and Tukey's HSD.
    Evaluate(EvaluateArgs),
    /// Render a TFR1 feature file as a grayscale PNG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    #[value(name = "linear-stft")]
    LinearStft,
    #[value(name = "mel-stft")]
    MelStft,
    Cqt,
    Cwt,
    Mfcc,
}

impl TransformArg {
    fn name(self) -> &'static str {
        match self {
            TransformArg::LinearStft => "linear-stft",
            TransformArg::MelStft => "mel-stft",
            TransformArg::Cqt => "cqt",
            TransformArg::Cwt => "cwt",
            TransformArg::Mfcc => "mfcc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    Wide,
    Narrow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Conv3,
    Conv5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    #[value(name = "3x3")]
    Square,
    #[value(name = "Mx3", alias = "mx3")]
    FreqSpanning,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// Time-frequency representation.
    #[arg(long, value_enum)]
    pub transform: TransformArg,
    /// Band preset (cwt and mfcc exist only as narrow).
    #[arg(long, value_enum, default_value = "narrow")]
    pub band: BandArg,
}

impl PresetArgs {
    fn resolve(&self) -> std::result::Result<TransformSpec, String> {
        let band = match self.band {
            BandArg::Wide => "wide",
            BandArg::Narrow => "narrow",
        };
        pipeline::resolve_transform(self.transform.name(), band).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// CSV manifest with columns path,label,fold.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub preset: PresetArgs,
    /// Output directory [default: $TFRBENCH_CACHE/<transform>-<band>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parallel extraction workers.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    /// Accepted for uniformity; extraction involves no randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// CSV manifest with columns path,label,fold.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub preset: PresetArgs,
    #[arg(long, value_enum, default_value = "conv3")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "3x3")]
    pub filter: FilterArg,
    /// Number of folds [default: highest fold id in the manifest].
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub folds: Option<u32>,
    /// Independent repetitions of the whole cross validation.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub runs: u32,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: u32,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub batch_size: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for report.json, confusion.csv and best.nnck.
    #[arg(long)]
    pub out: PathBuf,
    /// Feature directory [default: $TFRBENCH_CACHE/<transform>-<band>].
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Parallel (run, fold) jobs.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    /// Suppress per-epoch progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// report.json files to compare, one group each.
    #[arg(long, num_args = 2.., required = true)]
    pub reports: Vec<PathBuf>,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Directory for comparison.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Accepted for uniformity; the comparison involves no randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// TFR1 feature file.
    #[arg(long)]
    pub input: PathBuf,
    /// PNG to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Accepted for uniformity; rendering involves no randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn execute(command: Command) -> std::result::Result<i32, Failure> {
    match command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Render(a) => render(a).map(|_| EXIT_OK).map_err(Failure::from),
    }
}

fn extract(a: ExtractArgs) -> std::result::Result<i32, Failure> {
    let spec = a.preset.resolve().map_err(Failure::Usage)?;
    let manifest = Manifest::load(&a.manifest)?;
    let out = a.out.unwrap_or_else(|| pipeline::default_feature_dir(&spec));
    let summary = pipeline::extract_all(&manifest, &spec, &out, a.workers as usize)?;
    for (path, err) in &summary.failures {
        eprintln!("failed: {path}: {err}");
    }
    println!(
        "extracted {} of {} clips as {}x{} {} features into {}",
        summary.written,
        manifest.len(),
        summary.shape.0,
        summary.shape.1,
        pipeline::preset_dir_name(&spec),
        out.display()
    );
    Ok(if summary.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn train(a: TrainArgs) -> std::result::Result<i32, Failure> {
    let spec = a.preset.resolve().map_err(Failure::Usage)?;
    if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
        return Err(Failure::Usage("--learning-rate must be positive".into()));
    }
    let manifest = Manifest::load(&a.manifest)?;
    if manifest.n_classes() < 2 {
        return Err(Failure::Runtime("the manifest needs at least two classes".into()));
    }
    let k_folds = a.folds.map(|k| k as usize).unwrap_or_else(|| manifest.n_folds());
    manifest.validate_folds(k_folds)?;
    let architecture = match a.model {
        ModelArg::Conv3 => Architecture::Conv3,
        ModelArg::Conv5 => Architecture::Conv5,
    };
    let filter = match a.filter {
        FilterArg::Square => FilterShape::Square3x3,
        FilterArg::FreqSpanning => FilterShape::FreqSpanning,
    };
    let job = TrainJob {
        spec,
        model: ModelConfig::new(architecture, filter, manifest.n_classes()),
        train: TrainConfig {
            batch_size: a.batch_size as usize,
            epochs: a.epochs as usize,
            optimizer: Adam {
                learning_rate: a.learning_rate,
                ..Adam::default()
            },
            seed: a.seed,
            ..TrainConfig::default()
        },
        k_folds,
        n_runs: a.runs as usize,
        workers: a.workers as usize,
    };
    let features = a.features.unwrap_or_else(|| pipeline::default_feature_dir(&spec));
    let data = pipeline::load_dataset(&manifest, &spec, &features)?;
    let quiet = a.quiet;
    let progress = move |line: &str| {
        if !quiet {
            let _ = writeln!(std::io::stderr(), "{line}");
        }
    };
    let outcome = pipeline::train_dataset(&data, &job, &progress)?;
    let written = pipeline::write_outputs(&a.out, &job, &outcome)?;
    let r = &outcome.report;
    println!(
        "{}: median accuracy {:.2}% (MAD {:.2}) over {} folds x {} runs",
        r.label(),
        100.0 * r.median,
        100.0 * r.mad,
        r.k_folds,
        r.n_runs
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(EXIT_OK)
}

fn evaluate(a: EvaluateArgs) -> std::result::Result<i32, Failure> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Failure::Usage("--alpha must be in (0, 1)".into()));
    }
    let cmp = pipeline::compare_reports(&a.reports, a.alpha)?;
    std::fs::create_dir_all(&a.out).map_err(|e| crate::Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    let path = a.out.join("comparison.json");
    let bytes = to_json_bytes(&cmp)?;
    std::fs::write(&path, bytes).map_err(|e| crate::Error::Io {
        path: path.clone(),
        source: e,
    })?;
    for g in &cmp.groups {
        let mark = if cmp.top.contains(&g.name) { "*" } else { " " };
        println!(
            "{mark} {:<36} median {:6.2}%  MAD {:5.2}  (n = {})",
            g.name,
            100.0 * g.median,
            100.0 * g.mad,
            g.n
        );
    }
    println!(
        "ANOVA {}: p = {:.4}; * = statistically tied top performers (alpha {})",
        if cmp.rejected { "rejects equal means" } else { "does not reject equal means" },
        cmp.p_value,
        cmp.alpha
    );
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn render(a: RenderArgs) -> Result<()> {
    let img = tfr1::read(&a.input)?;
    png_io::export_png(&img, &a.out)?;
    println!("rendered {}x{} image to {}", img.rows(), img.cols(), a.out.display());
    Ok(())
}
