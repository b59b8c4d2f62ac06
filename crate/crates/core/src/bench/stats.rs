//! Summary statistics and the ANOVA / Tukey comparison used to pick the
//! statistically tied top performers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::special::{f_distribution_sf, studentized_range_cdf, studentized_range_quantile};
use crate::{Error, Matrix, Result};

/// Median of a nonempty list (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid!("median of an empty list"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid!("median of a list containing NaN"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Median and unscaled median absolute deviation.
pub fn median_mad(values: &[f64]) -> Result<(f64, f64)> {
    let m = median(values)?;
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    Ok((m, median(&dev)?))
}

/// `C x C` counts, entry `(i, j)` = examples of true class `i` predicted as
/// `j`.
pub fn confusion_matrix(preds: &[usize], labels: &[usize], n_classes: usize) -> Result<Matrix> {
    if preds.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} predictions", labels.len()),
            found: format!("{}", preds.len()),
        });
    }
    let mut m = Matrix::zeros(n_classes, n_classes);
    for (&p, &l) in preds.iter().zip(labels) {
        if p >= n_classes || l >= n_classes {
            return Err(Error::OutOfRange(format!(
                "class {} with {n_classes} classes",
                p.max(l)
            )));
        }
        m.as_mut_slice()[l * n_classes + p] += 1.0;
    }
    Ok(m)
}

/// Fraction of the confusion matrix on the diagonal.
pub fn accuracy_of(confusion: &Matrix) -> f64 {
    let total: f64 = confusion.as_slice().iter().sum();
    let trace: f64 = (0..confusion.rows()).map(|i| confusion[(i, i)]).sum();
    if total == 0.0 {
        0.0
    } else {
        trace / total
    }
}

/// One Tukey-Kramer pairwise comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct TukeyPair {
    pub a: usize,
    pub b: usize,
    /// `mean[a] - mean[b]`.
    pub mean_diff: f64,
    /// Studentized range statistic `|diff| / sqrt(MSW/2 (1/n_a + 1/n_b))`.
    pub q: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// One-way ANOVA followed (when rejected) by Tukey's HSD.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub alpha: f64,
    pub means: Vec<f64>,
    pub sizes: Vec<usize>,
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ms_within: f64,
    pub f: f64,
    pub p_value: f64,
    pub rejected: bool,
    /// Upper `alpha` quantile of the studentized range for these degrees of
    /// freedom.
    pub q_critical: f64,
    /// Every pair `a < b`; empty when the ANOVA did not reject.
    pub pairs: Vec<TukeyPair>,
    /// Groups statistically tied with the best mean, in index order; never
    /// empty.
    pub top: Vec<usize>,
}

/// Compares groups of accuracies at level `alpha`.
///
/// If the F test does not reject equal means, every group is a top
/// performer. Otherwise the top set is the group with the highest mean plus
/// every group Tukey's HSD cannot separate from it.
pub fn anova_tukey(groups: &[Vec<f64>], alpha: f64) -> Result<Comparison> {
    if groups.len() < 2 {
        return Err(invalid!("need at least two groups, got {}", groups.len()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid!("alpha must be in (0, 1)"));
    }
    if let Some(i) = groups.iter().position(|g| g.len() < 2) {
        return Err(invalid!("group {i} has fewer than two values"));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid!("group values must be finite"));
    }
    let k = groups.len();
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let n: usize = sizes.iter().sum();
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let ss_between: f64 = means
        .iter()
        .zip(&sizes)
        .map(|(m, &s)| s as f64 * (m - grand) * (m - grand))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|v| (v - m) * (v - m)).sum::<f64>())
        .sum();
    let df_between = k - 1;
    let df_within = n - k;
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let spread_free = ss_within == 0.0;
    let means_equal = means.iter().all(|&m| m == means[0]);
    let f = match (spread_free, means_equal) {
        (true, true) => {
            return Err(Error::Degenerate(
                "every group is the same constant; the F ratio is 0/0".into(),
            ))
        }
        (true, false) => f64::INFINITY,
        (false, _) => ms_between / ms_within,
    };
    let p_value = f_distribution_sf(f, df_between as f64, df_within as f64);
    let rejected = p_value < alpha;
    let q_critical = studentized_range_quantile(alpha, k, df_within as f64);

    let mut pairs = Vec::new();
    let mut best = 0;
    for (i, &m) in means.iter().enumerate() {
        if m > means[best] {
            best = i;
        }
    }
    let mut top = vec![best];
    if rejected {
        for a in 0..k {
            for b in a + 1..k {
                let diff = means[a] - means[b];
                let se = libm::sqrt(
                    0.5 * ms_within * (1.0 / sizes[a] as f64 + 1.0 / sizes[b] as f64),
                );
                let q = if diff == 0.0 {
                    0.0
                } else if se == 0.0 || spread_free {
                    f64::INFINITY
                } else {
                    diff.abs() / se
                };
                let p = 1.0 - studentized_range_cdf(q, k, df_within as f64);
                pairs.push(TukeyPair {
                    a,
                    b,
                    mean_diff: diff,
                    q,
                    p_value: p,
                    significant: p < alpha,
                });
            }
        }
        for p in &pairs {
            let other = if p.a == best {
                p.b
            } else if p.b == best {
                p.a
            } else {
                continue;
            };
            if !p.significant {
                top.push(other);
            }
        }
    } else {
        top = (0..k).collect();
    }
    top.sort_unstable();
    Ok(Comparison {
        alpha,
        means,
        sizes,
        ss_between,
        ss_within,
        df_between,
        df_within,
        ms_within,
        f,
        p_value,
        rejected,
        q_critical,
        pairs,
        top,
    })
}
