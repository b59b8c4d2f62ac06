//! The evaluation protocol: k-fold cross validation with best-epoch test
//! accuracy, median/MAD aggregation, confusion matrices and significance
//! testing across transforms.

mod cv;
mod stats;

pub use cv::{
    assemble_report, derive_seed, fold_jobs, run_cv, run_fold, run_fold_with, Dataset, EvalReport,
    FoldJob, FoldResult, FoldSummary,
};
pub use stats::{
    accuracy_of, anova_tukey, confusion_matrix, median, median_mad, Comparison, TukeyPair,
};
