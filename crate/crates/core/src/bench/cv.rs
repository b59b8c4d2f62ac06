//! k-fold cross validation with per-epoch shuffling and best-epoch test
//! accuracy.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::stats::{confusion_matrix, median_mad};
use crate::error::invalid;
use crate::nn::{batch_from_images, AdamState, ModelConfig, Network, ParamSet, TrainConfig};
use crate::{Error, Matrix, Result};

/// Feature images held in memory with their labels and fold assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: usize,
    cols: usize,
    n_classes: usize,
    images: Vec<Vec<f64>>,
    labels: Vec<usize>,
    folds: Vec<usize>,
}

impl Dataset {
    /// `images` are row-major `rows x cols`; folds are 1-based.
    pub fn new(
        rows: usize,
        cols: usize,
        n_classes: usize,
        images: Vec<Vec<f64>>,
        labels: Vec<usize>,
        folds: Vec<usize>,
    ) -> Result<Self> {
        if images.len() != labels.len() || images.len() != folds.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels and folds", images.len()),
                found: format!("{} labels, {} folds", labels.len(), folds.len()),
            });
        }
        if let Some(i) = images.iter().position(|im| im.len() != rows * cols) {
            return Err(Error::ShapeMismatch {
                expected: format!("{rows}x{cols} image"),
                found: format!("{} values at index {i}", images[i].len()),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::OutOfRange(format!("label {l} with {n_classes} classes")));
        }
        if folds.contains(&0) {
            return Err(Error::OutOfRange("fold ids are 1-based".into()));
        }
        Ok(Self {
            rows,
            cols,
            n_classes,
            images,
            labels,
            folds,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn image(&self, i: usize) -> &[f64] {
        &self.images[i]
    }

    /// Checks every fold in `1..=k` is nonempty and no id exceeds `k`.
    pub fn check_folds(&self, k: usize) -> Result<()> {
        if k < 2 {
            return Err(invalid!("cross validation needs at least two folds"));
        }
        if let Some(&f) = self.folds.iter().find(|&&f| f > k) {
            return Err(Error::OutOfRange(format!("fold {f} with k = {k}")));
        }
        for fold in 1..=k {
            if !self.folds.contains(&fold) {
                return Err(invalid!("fold {fold} has no samples"));
            }
        }
        Ok(())
    }

    /// Indices outside and inside fold `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.folds[i] != fold)
    }

    fn batch(&self, idx: &[usize]) -> crate::nn::Tensor {
        batch_from_images(idx.iter().map(|&i| self.images[i].as_slice()), self.rows, self.cols)
    }
}

/// One (run, held-out fold) training job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldJob {
    /// 0-based run index.
    pub run: usize,
    /// 1-based held-out fold.
    pub fold: usize,
    pub seed: u64,
}

/// SplitMix64-style mix of the base seed with the job coordinates.
pub fn derive_seed(base: u64, run: usize, fold: usize) -> u64 {
    let mut z = base
        ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (fold as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// All jobs in (run, fold) order.
pub fn fold_jobs(k: usize, n_runs: usize, base_seed: u64) -> Vec<FoldJob> {
    (0..n_runs)
        .flat_map(|run| {
            (1..=k).map(move |fold| FoldJob {
                run,
                fold,
                seed: derive_seed(base_seed, run, fold),
            })
        })
        .collect()
}

/// Outcome of one job; `predictions` and `params` are from the best epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub job: FoldJob,
    pub epoch_losses: Vec<f64>,
    pub epoch_accuracies: Vec<f64>,
    /// 0-based; the first epoch reaching the maximum.
    pub best_epoch: usize,
    pub best_accuracy: f64,
    pub test_indices: Vec<usize>,
    pub test_labels: Vec<usize>,
    pub predictions: Vec<usize>,
    pub params: ParamSet,
}

const EVAL_CHUNK: usize = 100;

fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
}

/// Trains on every fold but `job.fold` and tests on it after each epoch.
pub fn run_fold(
    data: &Dataset,
    model: &ModelConfig,
    train: &TrainConfig,
    job: FoldJob,
) -> Result<FoldResult> {
    run_fold_with(data, model, train, job, &mut |_, _, _| {})
}

/// [`run_fold`] reporting `(epoch, mean training loss, test accuracy)` after
/// every epoch.
pub fn run_fold_with(
    data: &Dataset,
    model: &ModelConfig,
    train: &TrainConfig,
    job: FoldJob,
    on_epoch: &mut dyn FnMut(usize, f64, f64),
) -> Result<FoldResult> {
    train.validate()?;
    if model.n_classes != data.n_classes {
        return Err(invalid!(
            "model has {} classes, dataset {}",
            model.n_classes,
            data.n_classes
        ));
    }
    let (mut order, test) = data.split(job.fold);
    if test.is_empty() || order.is_empty() {
        return Err(invalid!("fold {} leaves an empty train or test set", job.fold));
    }
    let net = Network::new(model, data.rows, data.cols)?;
    let mut params = net.init_params(job.seed, train.init_std);
    let mut state = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    rng.set_stream(1);
    let test_labels: Vec<usize> = test.iter().map(|&i| data.labels[i]).collect();

    let mut best: Option<(usize, f64, Vec<usize>, ParamSet)> = None;
    let mut epoch_losses = Vec::with_capacity(train.epochs);
    let mut epoch_accuracies = Vec::with_capacity(train.epochs);
    for epoch in 0..train.epochs {
        shuffle(&mut order, &mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(train.batch_size) {
            let batch = data.batch(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
            let (loss, grads) =
                net.loss_and_grads(&params, &batch, &labels, Some(&mut rng as &mut dyn RngCore))?;
            if !loss.is_finite() {
                return Err(Error::Degenerate(format!("non-finite loss at epoch {epoch}")));
            }
            loss_sum += loss * chunk.len() as f64;
            train.optimizer.step(&mut params, &grads, &mut state);
        }
        let mean_loss = loss_sum / order.len() as f64;

        let mut preds = Vec::with_capacity(test.len());
        for chunk in test.chunks(EVAL_CHUNK) {
            preds.extend(net.predict(&params, &data.batch(chunk))?);
        }
        let correct = preds.iter().zip(&test_labels).filter(|(p, l)| p == l).count();
        let acc = correct as f64 / test.len() as f64;
        epoch_losses.push(mean_loss);
        epoch_accuracies.push(acc);
        on_epoch(epoch, mean_loss, acc);
        if best.as_ref().is_none_or(|b| acc > b.1) {
            best = Some((epoch, acc, preds, params.clone()));
        }
    }
    let (best_epoch, best_accuracy, predictions, params) = best.expect("epochs >= 1");
    Ok(FoldResult {
        job,
        epoch_losses,
        epoch_accuracies,
        best_epoch,
        best_accuracy,
        test_indices: test,
        test_labels,
        predictions,
        params,
    })
}

/// Per-job entry of an [`EvalReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub run: usize,
    pub fold: usize,
    pub seed: u64,
    pub best_epoch: usize,
    pub best_accuracy: f64,
    pub epoch_accuracies: Vec<f64>,
}

/// Aggregated cross-validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k_folds: usize,
    pub n_runs: usize,
    pub n_classes: usize,
    /// In (run, fold) order.
    pub folds: Vec<FoldSummary>,
    pub median: f64,
    pub mad: f64,
    /// Index into `folds` of the best (first on ties) job.
    pub best: usize,
    /// From the best epoch of the best job.
    pub confusion: Matrix,
}

impl EvalReport {
    /// Best-epoch accuracies in (run, fold) order.
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.best_accuracy).collect()
    }
}

/// Combines every (run, fold) result into a report. Results may arrive in
/// any order; the report is identical regardless.
pub fn assemble_report(
    n_classes: usize,
    k: usize,
    n_runs: usize,
    mut results: Vec<FoldResult>,
) -> Result<EvalReport> {
    results.sort_by_key(|r| (r.job.run, r.job.fold));
    let expected = fold_jobs(k, n_runs, 0);
    if results.len() != expected.len()
        || results
            .iter()
            .zip(&expected)
            .any(|(r, e)| (r.job.run, r.job.fold) != (e.run, e.fold))
    {
        return Err(Error::ShapeMismatch {
            expected: format!("one result per (run, fold) for {n_runs} runs x {k} folds"),
            found: format!("{} results", results.len()),
        });
    }
    let accs: Vec<f64> = results.iter().map(|r| r.best_accuracy).collect();
    let (median, mad) = median_mad(&accs)?;
    let mut best = 0;
    for (i, &a) in accs.iter().enumerate() {
        if a > accs[best] {
            best = i;
        }
    }
    let confusion = confusion_matrix(
        &results[best].predictions,
        &results[best].test_labels,
        n_classes,
    )?;
    let folds = results
        .iter()
        .map(|r| FoldSummary {
            run: r.job.run,
            fold: r.job.fold,
            seed: r.job.seed,
            best_epoch: r.best_epoch,
            best_accuracy: r.best_accuracy,
            epoch_accuracies: r.epoch_accuracies.clone(),
        })
        .collect();
    Ok(EvalReport {
        k_folds: k,
        n_runs,
        n_classes,
        folds,
        median,
        mad,
        best,
        confusion,
    })
}

/// Sequential cross validation: every run holds out each fold once.
/// Returns the report and the best job's full result.
pub fn run_cv(
    data: &Dataset,
    model: &ModelConfig,
    train: &TrainConfig,
    k: usize,
    n_runs: usize,
) -> Result<(EvalReport, FoldResult)> {
    data.check_folds(k)?;
    if n_runs == 0 {
        return Err(invalid!("need at least one run"));
    }
    let results = fold_jobs(k, n_runs, train.seed)
        .into_iter()
        .map(|job| run_fold(data, model, train, job))
        .collect::<Result<Vec<_>>>()?;
    let report = assemble_report(data.n_classes, k, n_runs, results.clone())?;
    let best = results
        .into_iter()
        .find(|r| (r.job.run, r.job.fold) == (report.folds[report.best].run, report.folds[report.best].fold))
        .expect("best job present");
    Ok((report, best))
}
