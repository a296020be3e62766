//! Scalar loss terms: supervised cross-entropy and the KL-based
//! contrastive family.

use crate::error::Error;
use crate::linalg::{self, DenseMatrix};

use crate::distance::PairSets;

/// Mean negative log-likelihood over labeled training nodes, natural log.
/// Takes row-wise log-probabilities to stay finite for confident wrong
/// predictions.
pub fn ce_loss(
    logp: &DenseMatrix,
    labels: &[Option<usize>],
    train_mask: &[bool],
) -> Result<f64, Error> {
    if labels.len() != logp.rows() || train_mask.len() != logp.rows() {
        return Err(Error::InvalidParameter(
            "labels and train mask must match the prediction rows".into(),
        ));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..logp.rows() {
        if !train_mask[i] {
            continue;
        }
        let y = labels[i]
            .ok_or_else(|| Error::Data(format!("train mask selects unlabeled node {i}")))?;
        if y >= logp.cols() {
            return Err(Error::Data(format!(
                "label out of range: node {i} has label {y} but k={}",
                logp.cols()
            )));
        }
        sum -= logp.get(i, y);
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidParameter(
            "cross-entropy needs at least one training node".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// KL divergence between two probability rows, natural log. Entries of
/// `p` at zero contribute nothing.
pub fn kl_row(p: &[f64], q: &[f64]) -> f64 {
    linalg::kl_div(p, q)
}

/// Self-consistency term for one node: KL from its perturbed prediction
/// to its frozen clean prediction.
pub fn self_consistency_loss(g_pert_row: &[f64], g_frozen_row: &[f64]) -> f64 {
    kl_row(g_pert_row, g_frozen_row)
}

/// Pairwise term for node `i`: mean KL to frozen positives minus `mu1`
/// times mean KL to frozen negatives. An empty set contributes zero, so
/// the value can be negative.
pub fn pairwise_loss(
    i: usize,
    pairs: &PairSets,
    g_pert: &DenseMatrix,
    g_frozen: &DenseMatrix,
    mu1: f64,
) -> f64 {
    let row = g_pert.row(i);
    let mean_kl = |set: &[usize]| -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let sum: f64 = set.iter().map(|&j| kl_row(row, g_frozen.row(j))).sum();
        sum / set.len() as f64
    };
    mean_kl(&pairs.positives[i]) - mu1 * mean_kl(&pairs.negatives[i])
}

/// Per-node unsupervised loss: self-consistency plus `mu2` times the
/// pairwise term.
pub fn unsupervised_loss(l_self: f64, l_pair: f64, mu2: f64) -> f64 {
    l_self + mu2 * l_pair
}

/// Full objective: cross-entropy plus the mean over all nodes of
/// w_i * L_U^i.
pub fn total_loss(ce: f64, unsup: &[f64], weights: &[f64]) -> Result<f64, Error> {
    if unsup.len() != weights.len() || unsup.is_empty() {
        return Err(Error::InvalidParameter(
            "unsupervised losses and weights must be nonempty and equal length".into(),
        ));
    }
    let n = unsup.len() as f64;
    let weighted: f64 = unsup.iter().zip(weights).map(|(l, w)| l * w).sum();
    Ok(ce + weighted / n)
}
