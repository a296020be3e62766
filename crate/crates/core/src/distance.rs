//! Relative distance between nodes and contrastive pair selection.
//!
//! Three ingredients feed one composite measure per anchor node:
//! a global term (KL divergence between softmaxed score rows), a local term
//! (capped BFS hop count), and an embedding term (cosine distance between
//! feature rows). Each component is min-max scaled over the anchor's
//! candidate set before the weighted sum, so the three live on comparable
//! footing regardless of graph diameter or feature magnitude.
//!
//! Positives are the head of the resulting ascending ranking; negatives are
//! a window deeper in, which targets moderately-far nodes rather than the
//! most alien ones.

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::graph::{Csr, Graph};
use crate::linalg::{self, DenseMatrix};
use crate::rng;

/// Weights and caps for the composite distance.
#[derive(Clone, Copy, Debug)]
pub struct DistanceConfig {
    /// Weight of the local (hop-count) component.
    pub lambda1: f64,
    /// Weight of the embedding (cosine) component.
    pub lambda2: f64,
    /// BFS cap; hops beyond it (or unreachable pairs) count as `hop_cap + 1`.
    pub hop_cap: usize,
    /// Per-anchor candidate budget. Anchors with more than this many other
    /// nodes rank a seeded uniform sample instead of the full set.
    pub pool_size: usize,
}

impl Default for DistanceConfig {
    fn default() -> DistanceConfig {
        DistanceConfig { lambda1: 0.5, lambda2: 0.75, hop_cap: 4, pool_size: 4096 }
    }
}

impl DistanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "distance weights must be non-negative, got lambda1={}, lambda2={}",
                self.lambda1, self.lambda2
            )));
        }
        if self.hop_cap == 0 {
            return Err(Error::InvalidParameter("hop_cap must be at least 1".into()));
        }
        if self.pool_size == 0 {
            return Err(Error::InvalidParameter("pool_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Borrowed views of everything the distance needs. The structure and the
/// feature matrix are passed separately from any `Graph` so callers can
/// point at perturbed copies.
#[derive(Clone, Copy)]
pub struct DistanceInputs<'a> {
    pub csr: &'a Csr,
    pub features: &'a DenseMatrix,
    pub z_star: &'a DenseMatrix,
}

impl<'a> DistanceInputs<'a> {
    pub fn from_graph(graph: &'a Graph, z_star: &'a DenseMatrix) -> DistanceInputs<'a> {
        DistanceInputs { csr: graph.csr(), features: graph.features(), z_star }
    }
}

/// KL divergence between the softmaxed score rows of two nodes. Softmax
/// keeps every probability strictly positive, so the value is always
/// finite; it is not symmetric in general.
pub fn global_topology_distance(z_star: &DenseMatrix, i: usize, j: usize) -> f64 {
    let k = z_star.cols();
    let mut pi = vec![0.0; k];
    let mut pj = vec![0.0; k];
    linalg::softmax_into(z_star.row(i), &mut pi);
    linalg::softmax_into(z_star.row(j), &mut pj);
    linalg::kl_div(&pi, &pj)
}

/// Capped hop count between two nodes; unreachable or farther than
/// `hop_cap` counts as `hop_cap + 1`, and the distance of a node to itself
/// is 0.
pub fn local_topology_distance(csr: &Csr, i: usize, j: usize, hop_cap: usize) -> Result<f64> {
    let hops = csr.bfs_hops(i, hop_cap)?;
    if j >= hops.len() {
        return Err(Error::InvalidParameter(format!(
            "node {j} out of range for {} nodes",
            hops.len()
        )));
    }
    Ok(hops[j] as f64)
}

/// One minus cosine similarity of the feature rows; zero-norm rows score
/// cosine 0, hence distance 1.
pub fn embedding_distance(features: &DenseMatrix, i: usize, j: usize) -> f64 {
    1.0 - linalg::cosine(features.row(i), features.row(j))
}

fn min_max_scale(values: &mut [f64]) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi <= lo {
        values.iter_mut().for_each(|v| *v = 0.0);
    } else {
        let span = hi - lo;
        values.iter_mut().for_each(|v| *v = (*v - lo) / span);
    }
}

/// Composite distances from anchor `i` to each candidate, in candidate
/// order. Each component is scaled to `[0, 1]` over the candidate set
/// before weighting; a component that is constant across candidates
/// contributes zero.
pub fn relative_distance_row(
    i: usize,
    candidates: &[usize],
    inputs: &DistanceInputs<'_>,
    config: &DistanceConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    if candidates.is_empty() {
        return Err(Error::InvalidParameter(format!("anchor {i} has an empty candidate set")));
    }
    let softmax = inputs.z_star.softmax_rows(ExecMode::Sequential);
    relative_row_with_softmax(i, candidates, inputs, config, &softmax)
}

/// Worker shared by the public row function and the batch sampler; takes
/// the precomputed row-softmax of the score matrix.
fn relative_row_with_softmax(
    i: usize,
    candidates: &[usize],
    inputs: &DistanceInputs<'_>,
    config: &DistanceConfig,
    softmax: &DenseMatrix,
) -> Result<Vec<f64>> {
    let hops = inputs.csr.bfs_hops(i, config.hop_cap)?;
    let pi = softmax.row(i);
    let xi = inputs.features.row(i);
    let mut dg = Vec::with_capacity(candidates.len());
    let mut dl = Vec::with_capacity(candidates.len());
    let mut de = Vec::with_capacity(candidates.len());
    for &j in candidates {
        dg.push(linalg::kl_div(pi, softmax.row(j)));
        dl.push(hops[j] as f64);
        de.push(1.0 - linalg::cosine(xi, inputs.features.row(j)));
    }
    min_max_scale(&mut dg);
    min_max_scale(&mut dl);
    min_max_scale(&mut de);
    Ok((0..candidates.len())
        .map(|c| dg[c] + config.lambda1 * dl[c] + config.lambda2 * de[c])
        .collect())
}

/// Slice boundaries into each anchor's ascending ranking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairIndices {
    /// Positives are ranking entries `0..post_end`.
    pub post_end: usize,
    /// Negatives start here.
    pub negt_beg: usize,
    /// Negatives end here (exclusive).
    pub negt_end: usize,
}

impl PairIndices {
    /// Defaults scaled to the ranking length: two positives, negatives in a
    /// window of up to 128 starting a quarter of the way down. These are
    /// implementation choices, so reports echo them explicitly.
    pub fn default_for(ranking_len: usize) -> Result<PairIndices> {
        if ranking_len < 2 {
            return Err(Error::InvalidParameter(format!(
                "a ranking of {ranking_len} nodes cannot hold both positives and negatives"
            )));
        }
        let post_end = 2.min(ranking_len - 1);
        let negt_beg = (ranking_len / 4).max(post_end);
        let negt_end = (negt_beg + 128).min(ranking_len);
        Ok(PairIndices { post_end, negt_beg, negt_end })
    }

    fn validate(&self, ranking_len: usize) -> Result<()> {
        let PairIndices { post_end, negt_beg, negt_end } = *self;
        if !(0 < post_end && post_end <= negt_beg && negt_beg < negt_end) {
            return Err(Error::InvalidParameter(format!(
                "pair indices must satisfy 0 < post_end <= negt_beg < negt_end, got \
                 post_end={post_end}, negt_beg={negt_beg}, negt_end={negt_end}"
            )));
        }
        if negt_end > ranking_len {
            return Err(Error::InvalidParameter(format!(
                "negt_end={negt_end} exceeds the {ranking_len} ranked candidates per anchor"
            )));
        }
        Ok(())
    }
}

/// Per-anchor positive and negative sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSets {
    pub positives: Vec<Vec<usize>>,
    pub negatives: Vec<Vec<usize>>,
    pub indices: PairIndices,
}

/// Ranks every other node (or a seeded uniform pool of `pool_size` of them
/// on large graphs) by composite distance from each anchor and slices the
/// ranking into positives and negatives.
///
/// Ties order by node id, so the output is deterministic; each anchor draws
/// from its own RNG stream, so parallel and sequential evaluation agree bit
/// for bit.
pub fn sample_pairs(
    inputs: &DistanceInputs<'_>,
    config: &DistanceConfig,
    indices: PairIndices,
    seed: u64,
    mode: ExecMode,
) -> Result<PairSets> {
    config.validate()?;
    let n = inputs.csr.n();
    if inputs.z_star.rows() != n || inputs.features.rows() != n {
        return Err(Error::InvalidParameter(
            "score and feature matrices must have one row per node".into(),
        ));
    }
    let ranking_len = (n.saturating_sub(1)).min(config.pool_size);
    indices.validate(ranking_len)?;
    let softmax = inputs.z_star.softmax_rows(mode);

    let rows: Vec<Result<(Vec<usize>, Vec<usize>)>> = exec::map_indexed(mode, n, |i| {
        let candidates: Vec<usize> = if n - 1 <= config.pool_size {
            (0..n).filter(|&j| j != i).collect()
        } else {
            let mut row_rng = rng::stream(seed, "pairs", i as u64);
            rand::seq::index::sample(&mut row_rng, n - 1, config.pool_size)
                .iter()
                .map(|v| if v < i { v } else { v + 1 })
                .collect()
        };
        let d = relative_row_with_softmax(i, &candidates, inputs, config, &softmax)?;
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| {
            d[a].partial_cmp(&d[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(candidates[a].cmp(&candidates[b]))
        });
        let pick = |range: std::ops::Range<usize>| -> Vec<usize> {
            order[range].iter().map(|&c| candidates[c]).collect()
        };
        Ok((pick(0..indices.post_end), pick(indices.negt_beg..indices.negt_end)))
    });

    let mut positives = Vec::with_capacity(n);
    let mut negatives = Vec::with_capacity(n);
    for row in rows {
        let (p, ng) = row?;
        positives.push(p);
        negatives.push(ng);
    }
    Ok(PairSets { positives, negatives, indices })
}

/// Sequential twin of [`sample_pairs`] with an identical result.
pub fn sample_pairs_seq(
    inputs: &DistanceInputs<'_>,
    config: &DistanceConfig,
    indices: PairIndices,
    seed: u64,
) -> Result<PairSets> {
    sample_pairs(inputs, config, indices, seed, ExecMode::Sequential)
}

/// Which node pairs enter the intra-class ratio analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairScope {
    /// Only pairs joined by an edge.
    Neighbors,
    /// Every unordered pair.
    All,
}

/// One bin of the intra-class ratio curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioBin {
    pub count: usize,
    pub intra: usize,
    pub ratio: Option<f64>,
}

/// Sorts labeled node pairs ascending by global topology distance (taken in
/// `(i, j)` order with `i < j`), splits them into `bins` equal-size bins,
/// and reports the fraction of same-class pairs per bin.
pub fn intra_class_ratio_bins(
    csr: &Csr,
    z_star: &DenseMatrix,
    labels: &[Option<usize>],
    bins: usize,
    scope: PairScope,
) -> Result<Vec<RatioBin>> {
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let n = csr.n();
    if z_star.rows() != n || labels.len() != n {
        return Err(Error::InvalidParameter(
            "scores and labels must have one entry per node".into(),
        ));
    }
    let softmax = z_star.softmax_rows(ExecMode::Sequential);
    let mut pairs: Vec<(f64, bool)> = Vec::new();
    let mut push = |i: usize, j: usize| {
        if let (Some(a), Some(b)) = (labels[i], labels[j]) {
            let d = linalg::kl_div(softmax.row(i), softmax.row(j));
            pairs.push((d, a == b));
        }
    };
    match scope {
        PairScope::Neighbors => {
            for (u, v) in csr.edges() {
                push(u, v);
            }
        }
        PairScope::All => {
            for i in 0..n {
                for j in (i + 1)..n {
                    push(i, j);
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let total = pairs.len();
    let base = total / bins;
    let extra = total % bins;
    let mut out = Vec::with_capacity(bins);
    let mut cursor = 0;
    for b in 0..bins {
        let size = base + usize::from(b < extra);
        let slice = &pairs[cursor..cursor + size];
        cursor += size;
        let intra = slice.iter().filter(|(_, same)| *same).count();
        let ratio = (size > 0).then(|| intra as f64 / size as f64);
        out.push(RatioBin { count: size, intra, ratio });
    }
    Ok(out)
}
