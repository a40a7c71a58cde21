//! Fisher discriminant ratio scoring and top-k feature selection.

use serde::{Deserialize, Serialize};

use crate::dataio::MiClass;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Per-class, per-feature mean and population variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    /// Indexed by [`MiClass::index`].
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub counts: [usize; 2],
}

impl ClassStats {
    /// Requires at least `min_rows` rows of each class.
    pub fn compute(m: &FeatureMatrix, min_rows: usize) -> Result<ClassStats> {
        let d = m.n_cols();
        let mut counts = [0usize; 2];
        let mut sums = [vec![0.0; d], vec![0.0; d]];
        for (row, label) in m.rows.iter().zip(&m.labels) {
            let c = label.index();
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(row) {
                *s += v;
            }
        }
        for class in MiClass::ALL {
            if counts[class.index()] < min_rows {
                return Err(Error::MissingClass(class.as_str()));
            }
        }
        let means = [0, 1].map(|c| {
            sums[c]
                .iter()
                .map(|s| s / counts[c] as f64)
                .collect::<Vec<_>>()
        });
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        for (row, label) in m.rows.iter().zip(&m.labels) {
            let c = label.index();
            for ((s, v), mu) in variances[c].iter_mut().zip(row).zip(&means[c]) {
                *s += (v - mu) * (v - mu);
            }
        }
        for c in 0..2 {
            variances[c].iter_mut().for_each(|s| *s /= counts[c] as f64);
        }
        Ok(ClassStats {
            means,
            variances,
            counts,
        })
    }
}

/// FDR score of every column: the sum over ordered class pairs `i != j` of
/// `(mu_i - mu_j)^2 / (var_i + var_j + eps_fdr)`.
pub fn fdr_scores(train: &FeatureMatrix, eps_fdr: f64) -> Result<Vec<f64>> {
    let stats = ClassStats::compute(train, 2)?;
    let m = stats.means.len();
    Ok((0..train.n_cols())
        .map(|f| {
            let mut score = 0.0;
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let diff = stats.means[i][f] - stats.means[j][f];
                    score +=
                        diff * diff / (stats.variances[i][f] + stats.variances[j][f] + eps_fdr);
                }
            }
            score
        })
        .collect())
}

/// Kept column indices and their scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMask {
    pub indices: Vec<usize>,
    pub scores: Vec<f64>,
}

impl SelectionMask {
    /// A mask with explicit indices (any order) and no scores attached.
    pub fn from_indices(indices: Vec<usize>) -> Self {
        let scores = vec![f64::NAN; indices.len()];
        Self { indices, scores }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The `k` highest scores, ties going to the lower index. Indices are
/// returned in ascending order.
pub fn select_top_k(scores: &[f64], k: usize) -> Result<SelectionMask> {
    if k > scores.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {k} of {} features",
            scores.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut indices = order[..k].to_vec();
    indices.sort_unstable();
    let kept = indices.iter().map(|&i| scores[i]).collect();
    Ok(SelectionMask {
        indices,
        scores: kept,
    })
}

/// Columns of `m` in mask order.
pub fn apply_mask(mask: &SelectionMask, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if let Some(&bad) = mask.indices.iter().find(|&&i| i >= m.n_cols()) {
        return Err(Error::InvalidArgument(format!(
            "mask index {bad} out of range for {} columns",
            m.n_cols()
        )));
    }
    FeatureMatrix::new(
        m.rows
            .iter()
            .map(|r| mask.indices.iter().map(|&i| r[i]).collect())
            .collect(),
        m.labels.clone(),
        mask.indices
            .iter()
            .map(|&i| m.column_names[i].clone())
            .collect(),
        m.groups.clone(),
    )
}

/// Selected features as written to result files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub indices: Vec<usize>,
    pub names: Vec<String>,
    pub scores: Vec<f64>,
}

impl SelectionReport {
    pub fn new(mask: &SelectionMask, column_names: &[String]) -> Self {
        Self {
            indices: mask.indices.clone(),
            names: mask
                .indices
                .iter()
                .map(|&i| column_names[i].clone())
                .collect(),
            scores: mask.scores.clone(),
        }
    }
}
