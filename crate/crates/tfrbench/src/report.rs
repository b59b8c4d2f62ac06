//! JSON and CSV report layouts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tfrbench_core::bench::{Comparison, EvalReport};
use tfrbench_core::feature::TransformSpec;
use tfrbench_core::nn::{ModelConfig, TrainConfig};
use tfrbench_core::Matrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init_std: f64,
    pub dropout: f64,
    pub l2: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEntry {
    pub run: usize,
    pub fold: usize,
    pub seed: u64,
    /// 1-based epoch with the highest test accuracy (first on ties).
    pub best_epoch: usize,
    pub accuracy: f64,
    pub epoch_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestJob {
    pub run: usize,
    pub fold: usize,
    pub accuracy: f64,
}

/// `report.json` written by `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub transform: String,
    pub band: String,
    pub model: String,
    pub filter: String,
    pub input_shape: [usize; 2],
    pub n_examples: usize,
    pub n_classes: usize,
    pub k_folds: usize,
    pub n_runs: usize,
    pub train: TrainSettings,
    /// Best-epoch test accuracy of every (run, fold), in that order.
    pub accuracies: Vec<FoldEntry>,
    pub median: f64,
    pub mad: f64,
    pub best: BestJob,
    /// Rows = true class, columns = predicted class, from the best epoch of
    /// the best (run, fold).
    pub confusion: Vec<Vec<u64>>,
}

impl ReportJson {
    pub fn new(
        spec: &TransformSpec,
        model: &ModelConfig,
        train: &TrainConfig,
        n_examples: usize,
        report: &EvalReport,
    ) -> Self {
        let best = &report.folds[report.best];
        let (rows, cols) = spec.output_shape();
        Self {
            transform: spec.kind.name().to_string(),
            band: spec.band.name().to_string(),
            model: model.architecture.name().to_string(),
            filter: model.filter.name().to_string(),
            input_shape: [rows, cols],
            n_examples,
            n_classes: report.n_classes,
            k_folds: report.k_folds,
            n_runs: report.n_runs,
            train: TrainSettings {
                epochs: train.epochs,
                batch_size: train.batch_size,
                learning_rate: train.optimizer.learning_rate,
                beta1: train.optimizer.beta1,
                beta2: train.optimizer.beta2,
                epsilon: train.optimizer.epsilon,
                init_std: train.init_std,
                dropout: model.dropout,
                l2: model.l2,
                seed: train.seed,
            },
            accuracies: report
                .folds
                .iter()
                .map(|f| FoldEntry {
                    run: f.run,
                    fold: f.fold,
                    seed: f.seed,
                    best_epoch: f.best_epoch + 1,
                    accuracy: f.best_accuracy,
                    epoch_accuracies: f.epoch_accuracies.clone(),
                })
                .collect(),
            median: report.median,
            mad: report.mad,
            best: BestJob {
                run: best.run,
                fold: best.fold,
                accuracy: best.best_accuracy,
            },
            confusion: matrix_counts(&report.confusion),
        }
    }

    /// `transform/band/model/filter`.
    pub fn label(&self) -> String {
        format!("{}/{}/{}/{}", self.transform, self.band, self.model, self.filter)
    }

    pub fn accuracy_values(&self) -> Vec<f64> {
        self.accuracies.iter().map(|a| a.accuracy).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
    }
}

fn matrix_counts(m: &Matrix) -> Vec<Vec<u64>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|&v| v as u64).collect())
        .collect()
}

/// Confusion matrix as CSV: header `true,0,1,...`, one row per true class.
pub fn confusion_csv(counts: &[Vec<u64>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["true".to_string()];
    header.extend((0..counts.len()).map(|c| c.to_string()));
    w.write_record(&header)?;
    for (i, row) in counts.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("CSV buffer: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub source: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub mad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub a: String,
    pub b: String,
    pub mean_diff: f64,
    pub q: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// `comparison.json` written by `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub alpha: f64,
    pub groups: Vec<GroupSummary>,
    pub f: Option<f64>,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
    pub rejected: bool,
    pub q_critical: f64,
    pub pairs: Vec<PairJson>,
    /// Statistically tied top performers.
    pub top: Vec<String>,
}

impl ComparisonJson {
    pub fn new(groups: Vec<GroupSummary>, cmp: &Comparison) -> Self {
        let name = |i: usize| groups[i].name.clone();
        Self {
            alpha: cmp.alpha,
            // JSON has no infinity; an unbounded F is written as null.
            f: cmp.f.is_finite().then_some(cmp.f),
            df_between: cmp.df_between,
            df_within: cmp.df_within,
            p_value: cmp.p_value,
            rejected: cmp.rejected,
            q_critical: cmp.q_critical,
            pairs: cmp
                .pairs
                .iter()
                .map(|p| PairJson {
                    a: name(p.a),
                    b: name(p.b),
                    mean_diff: p.mean_diff,
                    q: if p.q.is_finite() { p.q } else { f64::MAX },
                    p_value: p.p_value,
                    significant: p.significant,
                })
                .collect(),
            top: cmp.top.iter().map(|&i| name(i)).collect(),
            groups,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
