//! Evaluation metrics: average loss, AUC and suboptimality.

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseVector};
use crate::loss::empirical_loss;

/// Mean logistic loss over the dataset.
pub fn average_loss(w: &DenseVector, d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::invalid("average loss of an empty dataset"));
    }
    empirical_loss(w, d)
}

/// `F(w) - F(w_star)` on the dataset.
pub fn suboptimality(w: &DenseVector, d: &Dataset, w_star: &DenseVector) -> Result<f64> {
    Ok(average_loss(w, d)? - average_loss(w_star, d)?)
}

/// Area under the ROC curve (Mann-Whitney statistic), ties counted half.
pub fn auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::Positive).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs at least one positive and one negative label".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the positive rank sum, with tied groups sharing their mean rank
    let mut twice_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start..end (1-based: start+1 ..= end) average to (start + 1 + end) / 2
        let twice_mean_rank = (start + 1 + end) as u64;
        let pos_in_group = order[start..end]
            .iter()
            .filter(|&&i| labels[i] == Label::Positive)
            .count() as u64;
        twice_rank_sum += pos_in_group * twice_mean_rank;
        start = end;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok((twice_u as f64 / 2.0) / (n_pos as f64 * n_neg as f64))
}

/// AUC of the linear scores `w . x` over a dataset.
pub fn dataset_auc(w: &DenseVector, d: &Dataset) -> Result<f64> {
    let mut scores = Vec::with_capacity(d.len());
    let mut labels = Vec::with_capacity(d.len());
    for e in d.examples() {
        scores.push(dot(&e.features, w)?);
        labels.push(e.label);
    }
    auc(&scores, &labels)
}
