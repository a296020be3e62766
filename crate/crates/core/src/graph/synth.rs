//! Seeded stochastic block model generator for experiments and tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{Csr, Graph};
use crate::linalg::DenseMatrix;
use crate::rng;

/// Parameters for [`synth_sbm`].
#[derive(Clone, Copy, Debug)]
pub struct SbmParams {
    /// Number of blocks; doubles as the class count and the feature width.
    pub k: usize,
    /// Nodes per block. Block `c` owns ids `c*per_class .. (c+1)*per_class`.
    pub per_class: usize,
    /// Within-block edge probability.
    pub p_in: f64,
    /// Cross-block edge probability; must be below `p_in`.
    pub p_out: f64,
    /// Standard deviation of the Gaussian noise added to each one-hot
    /// prototype feature.
    pub noise: f64,
    /// Training nodes drawn per class.
    pub labels_per_class: usize,
}

/// Draws a block-model graph with one-hot-plus-noise features and a
/// train/val/test split.
///
/// Every node carries its block id as a label. Per class, `labels_per_class`
/// seeded picks form the train set, up to 30 further picks form the
/// validation set, and the remainder is test. Three independent substreams
/// of `seed` drive edges, features, and the split, so regenerating with the
/// same seed reproduces the dataset exactly.
pub fn synth_sbm(params: &SbmParams, seed: u64) -> Result<Graph> {
    let SbmParams { k, per_class, p_in, p_out, noise, labels_per_class } = *params;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 blocks, got {k}")));
    }
    if per_class == 0 {
        return Err(Error::InvalidParameter("per_class must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::InvalidParameter(format!(
            "edge probabilities must lie in [0, 1], got p_in={p_in}, p_out={p_out}"
        )));
    }
    if p_in <= p_out {
        return Err(Error::InvalidParameter(format!(
            "block structure requires p_in > p_out, got p_in={p_in}, p_out={p_out}"
        )));
    }
    if noise < 0.0 {
        return Err(Error::InvalidParameter(format!("noise must be non-negative, got {noise}")));
    }
    if labels_per_class > per_class {
        return Err(Error::InvalidParameter(format!(
            "labels_per_class={labels_per_class} exceeds per_class={per_class}"
        )));
    }

    let n = k * per_class;
    let block = |i: usize| i / per_class;

    let mut edge_rng = rng::stream(seed, "sbm", 0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if block(i) == block(j) { p_in } else { p_out };
            if edge_rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let csr = Csr::from_undirected_edges(n, &edges)?;

    let mut feat_rng = rng::stream(seed, "sbm-feat", 0);
    let mut features = DenseMatrix::zeros(n, k);
    for i in 0..n {
        let row = features.row_mut(i);
        for (c, v) in row.iter_mut().enumerate() {
            let base = if c == block(i) { 1.0 } else { 0.0 };
            let eps: f64 = feat_rng.sample(StandardNormal);
            *v = base + noise * eps;
        }
    }

    let labels: Vec<Option<usize>> = (0..n).map(|i| Some(block(i))).collect();
    let mut train_mask = vec![false; n];
    let mut val_mask = vec![false; n];
    let mut test_mask = vec![false; n];
    let val_per_class = 30.min(per_class - labels_per_class);
    for c in 0..k {
        let mut split_rng = rng::stream(seed, "sbm-split", c as u64);
        let picks = rand::seq::index::sample(&mut split_rng, per_class, labels_per_class + val_per_class);
        let base = c * per_class;
        for (slot, offset) in picks.iter().enumerate() {
            if slot < labels_per_class {
                train_mask[base + offset] = true;
            } else {
                val_mask[base + offset] = true;
            }
        }
    }
    for i in 0..n {
        test_mask[i] = !train_mask[i] && !val_mask[i];
    }

    Graph::new(csr, features, labels, k, train_mask, val_mask, test_mask)
}
