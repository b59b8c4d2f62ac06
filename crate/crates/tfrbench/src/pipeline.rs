//! Extraction, training and comparison jobs shared by the CLI and tests.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use tfrbench_core::bench::{self, anova_tukey, assemble_report, fold_jobs, Dataset, FoldResult};
use tfrbench_core::feature::{extract_feature, Band, FeatureImage, TransformSpec};
use tfrbench_core::nn::{ModelConfig, Network, TrainConfig};
use tfrbench_core::TfKind;

use crate::error::{Error, Result};
use crate::manifest::{Manifest, ManifestEntry};
use crate::report::{confusion_csv, to_json_bytes, ComparisonJson, GroupSummary, ReportJson};
use crate::{checkpoint, tfr1, wav};

/// Environment variable naming the feature cache root.
pub const CACHE_ENV: &str = "TFRBENCH_CACHE";
/// Cache root used when the variable is unset.
pub const DEFAULT_CACHE: &str = ".tfrbench-cache";

/// Resolves preset names such as `mel-stft` + `narrow`.
pub fn resolve_transform(transform: &str, band: &str) -> Result<TransformSpec> {
    let kind = TfKind::from_name(transform).ok_or_else(|| {
        Error::Config(format!(
            "unknown transform `{transform}` (expected one of linear-stft, mel-stft, cqt, cwt, mfcc)"
        ))
    })?;
    let band = Band::from_name(band)
        .ok_or_else(|| Error::Config(format!("unknown band `{band}` (expected wide or narrow)")))?;
    TransformSpec::new(kind, band).map_err(|e| Error::Config(e.to_string()))
}

/// `<transform>-<band>`, the per-preset cache subdirectory.
pub fn preset_dir_name(spec: &TransformSpec) -> String {
    format!("{}-{}", spec.kind.name(), spec.band.name())
}

/// `$TFRBENCH_CACHE/<preset>` (or the default root).
pub fn default_feature_dir(spec: &TransformSpec) -> PathBuf {
    let root = std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE));
    root.join(preset_dir_name(spec))
}

/// `<stem>-<first 16 hex digits of sha256(manifest path)>.tfr`: stable across
/// runs and unique even when stems repeat in different directories.
pub fn feature_file_name(entry: &ManifestEntry) -> String {
    let stem = Path::new(&entry.path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let digest = Sha256::digest(entry.path.as_bytes());
    format!("{stem}-{}.tfr", &hex::encode(digest)[..16])
}

/// Loads one clip, standardizes it and computes its feature image.
pub fn extract_clip(path: &Path, spec: &TransformSpec) -> Result<FeatureImage> {
    let clip = wav::load_standard(path)?;
    Ok(extract_feature(&clip, spec)?)
}

#[derive(Debug)]
pub struct ExtractSummary {
    pub written: usize,
    pub shape: (usize, usize),
    /// Manifest path and error message of every failed clip, in manifest
    /// order.
    pub failures: Vec<(String, String)>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Writes one TFR1 file per manifest entry into `out_dir`. Failing clips are
/// recorded and skipped.
pub fn extract_all(
    manifest: &Manifest,
    spec: &TransformSpec,
    out_dir: &Path,
    workers: usize,
) -> Result<ExtractSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let outcomes: Vec<Result<()>> = pool(workers)?.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let img = extract_clip(&manifest.resolve(entry), spec)?;
                tfr1::write(&out_dir.join(feature_file_name(entry)), &img)
            })
            .collect()
    });
    let mut failures = Vec::new();
    for (entry, outcome) in manifest.entries.iter().zip(outcomes) {
        if let Err(e) = outcome {
            failures.push((entry.path.clone(), e.to_string()));
        }
    }
    Ok(ExtractSummary {
        written: manifest.len() - failures.len(),
        shape: spec.output_shape(),
        failures,
    })
}

/// Reads every entry's feature file from `feature_dir` into a dataset.
pub fn load_dataset(manifest: &Manifest, spec: &TransformSpec, feature_dir: &Path) -> Result<Dataset> {
    let (rows, cols) = spec.output_shape();
    let mut images = Vec::with_capacity(manifest.len());
    let mut missing = Vec::new();
    for entry in &manifest.entries {
        let path = feature_dir.join(feature_file_name(entry));
        if !path.exists() {
            missing.push(entry.path.clone());
            continue;
        }
        let img = tfr1::read(&path)?;
        if (img.rows(), img.cols()) != (rows, cols) || img.kind != spec.kind {
            return Err(Error::format(
                &path,
                format!(
                    "holds a {}x{} {} image, expected {rows}x{cols} {}",
                    img.rows(),
                    img.cols(),
                    img.kind.name(),
                    spec.kind.name()
                ),
            ));
        }
        images.push(img.values.into_vec());
    }
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "{} feature files missing from {} (first: `{}`); run `tfrbench extract` first",
            missing.len(),
            feature_dir.display(),
            missing[0]
        )));
    }
    Ok(Dataset::new(
        rows,
        cols,
        manifest.n_classes(),
        images,
        manifest.entries.iter().map(|e| e.label).collect(),
        manifest.entries.iter().map(|e| e.fold).collect(),
    )?)
}

/// Everything a training job needs.
#[derive(Debug, Clone)]
pub struct TrainJob {
    pub spec: TransformSpec,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub k_folds: usize,
    pub n_runs: usize,
    pub workers: usize,
}

pub struct TrainOutcome {
    pub report: ReportJson,
    pub best: FoldResult,
}

/// Runs every (run, fold) job on the worker pool and assembles the report.
/// The result does not depend on the worker count.
pub fn train_dataset(
    data: &Dataset,
    job: &TrainJob,
    progress: &(dyn Fn(&str) + Sync),
) -> Result<TrainOutcome> {
    data.check_folds(job.k_folds)?;
    if job.n_runs == 0 {
        return Err(Error::Config("need at least one run".into()));
    }
    let jobs = fold_jobs(job.k_folds, job.n_runs, job.train.seed);
    let results: Vec<Result<FoldResult>> = pool(job.workers)?.install(|| {
        jobs.par_iter()
            .map(|&j| {
                let r = bench::run_fold_with(data, &job.model, &job.train, j, &mut |epoch, loss, acc| {
                    progress(&format!(
                        "run {} fold {} epoch {}: loss {loss:.4}, test accuracy {:.2}%",
                        j.run,
                        j.fold,
                        epoch + 1,
                        100.0 * acc
                    ))
                })?;
                Ok(r)
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let report = assemble_report(data.n_classes(), job.k_folds, job.n_runs, results.clone())?;
    let best_key = (report.folds[report.best].run, report.folds[report.best].fold);
    let best = results
        .into_iter()
        .find(|r| (r.job.run, r.job.fold) == best_key)
        .expect("assembled report refers to an existing job");
    Ok(TrainOutcome {
        report: ReportJson::new(&job.spec, &job.model, &job.train, data.len(), &report),
        best,
    })
}

/// Writes `report.json`, `confusion.csv` and `best.nnck` into `out_dir`.
pub fn write_outputs(out_dir: &Path, job: &TrainJob, outcome: &TrainOutcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, to_json_bytes(&outcome.report)?)
        .map_err(|e| Error::io(&report_path, e))?;
    let csv_path = out_dir.join("confusion.csv");
    std::fs::write(&csv_path, confusion_csv(&outcome.report.confusion)?)
        .map_err(|e| Error::io(&csv_path, e))?;
    let (rows, cols) = job.spec.output_shape();
    let net = Network::new(&job.model, rows, cols)?;
    let ckpt_path = out_dir.join("best.nnck");
    checkpoint::save(&ckpt_path, &net, &outcome.best.params)?;
    Ok(vec![report_path, csv_path, ckpt_path])
}

/// ANOVA + Tukey HSD across report files, one group per report.
pub fn compare_reports(paths: &[PathBuf], alpha: f64) -> Result<ComparisonJson> {
    if paths.len() < 2 {
        return Err(Error::Config("evaluate needs at least two reports".into()));
    }
    let mut groups = Vec::new();
    let mut values = Vec::new();
    for path in paths {
        let report = ReportJson::load(path)?;
        let accs = report.accuracy_values();
        let (median, mad) = bench::median_mad(&accs)?;
        groups.push(GroupSummary {
            name: report.label(),
            source: path.display().to_string(),
            n: accs.len(),
            mean: accs.iter().sum::<f64>() / accs.len() as f64,
            median,
            mad,
        });
        values.push(accs);
    }
    let cmp = anova_tukey(&values, alpha)?;
    Ok(ComparisonJson::new(groups, &cmp))
}
