//! Weighted graph perturbation with negative feedback.
//!
//! Nodes are drawn one at a time from a sharpened softmax over the loss
//! weights. Each selected node gets edges added toward non-neighbors, edges
//! removed from current neighbors, and a slice of its feature row zeroed.
//! After every selection the probability of the node drops to zero and its
//! graph neighborhood is damped, so successive picks spread out instead of
//! hammering one region. The loop stops once the Frobenius norm of the
//! adjacency delta reaches a threshold, or earlier if the probability mass
//! runs out.
//!
//! The sharpened softmax is applied once, up front. Renormalization inside
//! the decay step divides by the sum instead of re-softmaxing, because a
//! repeated softmax would re-flatten the distribution and undo the damping
//! it is meant to apply.

use std::collections::BTreeSet;

use log::{debug, warn};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Csr, Graph};
use crate::linalg::DenseMatrix;
use crate::rng;

/// Knobs for one perturbation pass.
#[derive(Clone, Copy, Debug)]
pub struct PerturbConfig {
    /// Sharpening coefficient for the initial selection softmax.
    pub sharpen_t: f64,
    /// Stop once the adjacency delta's Frobenius norm reaches this.
    pub sigma: f64,
    /// Edges added per selected node.
    pub n_add: usize,
    /// Edges removed per selected node.
    pub n_rmv: usize,
    /// Fraction of feature columns zeroed per selected node.
    pub mask_rate: f64,
    /// Neighborhood radius of the probability damping.
    pub decay_hops: usize,
    /// Damping multiplier applied within that radius.
    pub decay_ratio: f64,
    pub seed: u64,
}

impl PerturbConfig {
    /// Defaults sized to a graph: the threshold targets a delta of about 5%
    /// of the edge count (each undirected change contributes 2 to the
    /// squared Frobenius norm). All values here are implementation choices
    /// surfaced through config echoes, not quantities with a source.
    pub fn for_graph(graph: &Graph, seed: u64) -> PerturbConfig {
        PerturbConfig::for_edge_count(graph.edge_count(), seed)
    }

    /// Same defaults from a bare edge count.
    pub fn for_edge_count(edges: usize, seed: u64) -> PerturbConfig {
        let changes = ((edges as f64) * 0.05).ceil().max(1.0);
        PerturbConfig {
            sharpen_t: 1.0,
            sigma: (2.0 * changes).sqrt(),
            n_add: 1,
            n_rmv: 1,
            mask_rate: 0.1,
            decay_hops: 1,
            decay_ratio: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sharpen_t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sharpen_t must be non-negative, got {}",
                self.sharpen_t
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.mask_rate) {
            return Err(Error::InvalidParameter(format!(
                "mask_rate must lie in [0, 1], got {}",
                self.mask_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.decay_ratio) {
            return Err(Error::InvalidParameter(format!(
                "decay_ratio must lie in [0, 1], got {}",
                self.decay_ratio
            )));
        }
        if self.n_add + self.n_rmv == 0 && self.mask_rate == 0.0 {
            return Err(Error::InvalidParameter(
                "nothing to perturb: n_add + n_rmv is 0 and mask_rate is 0".into(),
            ));
        }
        Ok(())
    }
}

/// Output of one perturbation pass.
#[derive(Clone, Debug)]
pub struct PerturbedGraph {
    /// Feature matrix with masked columns zeroed on touched rows.
    pub x_p: DenseMatrix,
    /// Perturbed adjacency; symmetric and self-loop-free.
    pub a_p: Csr,
    /// Selected nodes in selection order.
    pub touched: Vec<usize>,
    /// Final Frobenius norm of `A_p - A` over the full symmetric matrix.
    pub gap: f64,
    /// True when the probability mass ran out before the threshold.
    pub exhausted: bool,
    /// Edges present in `A_p` but not in the input, as `(u, v)` with u < v.
    pub added: Vec<(usize, usize)>,
    /// Edges present in the input but not in `A_p`, same convention.
    pub removed: Vec<(usize, usize)>,
}

/// Sharpened softmax over per-node weights: `P[i] = exp(w_i t) / sum`.
/// At `t = 0` every node is equally likely.
pub fn selection_probabilities(weights: &[f64], sharpen_t: f64) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("selection needs at least one node".into()));
    }
    let mut out = vec![0.0; weights.len()];
    let scaled: Vec<f64> = weights.iter().map(|&w| w * sharpen_t).collect();
    crate::linalg::softmax_into(&scaled, &mut out);
    Ok(out)
}

/// Negative feedback after selecting node `i`: zero `P[i]`, damp everything
/// within `decay_hops` hops of `i` on the given structure by `decay_ratio`,
/// and renormalize by the sum. Returns `None` when no mass survives, which
/// signals the caller to stop.
pub fn probability_decay(
    probs: &[f64],
    i: usize,
    csr: &Csr,
    decay_hops: usize,
    decay_ratio: f64,
) -> Result<Option<Vec<f64>>> {
    if i >= probs.len() || probs.len() != csr.n() {
        return Err(Error::InvalidParameter(format!(
            "decay target {i} incompatible with {} probabilities over {} nodes",
            probs.len(),
            csr.n()
        )));
    }
    let mut next = probs.to_vec();
    next[i] = 0.0;
    if decay_hops > 0 {
        let hops = csr.bfs_hops(i, decay_hops)?;
        for (x, &h) in hops.iter().enumerate() {
            if x != i && h <= decay_hops {
                next[x] *= decay_ratio;
            }
        }
    }
    let total: f64 = next.iter().sum();
    if !(total > 0.0) {
        return Ok(None);
    }
    for v in next.iter_mut() {
        *v /= total;
    }
    Ok(Some(next))
}

/// Runs the full perturbation loop and returns the modified graph pieces.
///
/// Additions pick uniform non-neighbors (with bounded resampling to dodge
/// duplicates), removals pick uniform current neighbors, and masking zeroes
/// `floor(mask_rate * h)` uniformly chosen feature columns of the selected
/// row. Exhaustion before the threshold returns normally with
/// `exhausted = true`, a warning, and `gap < sigma`.
pub fn perturb(graph: &Graph, weights: &[f64], config: &PerturbConfig) -> Result<PerturbedGraph> {
    config.validate()?;
    let n = graph.n();
    if weights.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} weights supplied for {n} nodes",
            weights.len()
        )));
    }
    let mut rng = rng::stream(config.seed, "perturb", 0);
    let mut probs = selection_probabilities(weights, config.sharpen_t)?;
    let mut adj: Vec<BTreeSet<usize>> =
        (0..n).map(|i| graph.neighbors(i).iter().copied().collect()).collect();
    // Undirected pairs (u < v) whose presence differs from the input.
    let mut delta: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut x_p = graph.features().clone();
    let h = graph.num_features();
    let mask_cols = ((config.mask_rate * h as f64).floor() as usize).min(h);
    let mut touched = Vec::new();
    let mut gap = 0.0;
    let mut exhausted = false;

    loop {
        let Some(i) = rng::categorical(&mut rng, &probs) else {
            exhausted = true;
            break;
        };
        touched.push(i);

        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let toggle = |delta: &mut BTreeSet<(usize, usize)>, a: usize, b: usize| {
            let k = key(a, b);
            if !delta.remove(&k) {
                delta.insert(k);
            }
        };

        // Additions: uniform non-neighbors, resampled on collision.
        for _ in 0..config.n_add {
            if adj[i].len() + 1 >= n {
                debug!("node {i} already adjacent to everything; skipping addition");
                break;
            }
            let mut placed = false;
            for _ in 0..(8 * n.max(8)) {
                let j = rng.gen_range(0..n);
                if j != i && !adj[i].contains(&j) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                    toggle(&mut delta, i, j);
                    placed = true;
                    break;
                }
            }
            if !placed {
                debug!("gave up finding a non-neighbor for node {i}");
            }
        }

        // Removals: uniform current neighbors; short rows lose everything.
        let current: Vec<usize> = adj[i].iter().copied().collect();
        let removals: Vec<usize> = if current.len() <= config.n_rmv {
            current
        } else {
            rand::seq::index::sample(&mut rng, current.len(), config.n_rmv)
                .iter()
                .map(|idx| current[idx])
                .collect()
        };
        for j in removals {
            adj[i].remove(&j);
            adj[j].remove(&i);
            toggle(&mut delta, i, j);
        }

        // Feature masking on the selected row only.
        if mask_cols > 0 {
            let cols = rand::seq::index::sample(&mut rng, h, mask_cols);
            let row = x_p.row_mut(i);
            for c in cols.iter() {
                row[c] = 0.0;
            }
        }

        // Each differing undirected pair contributes 2 to the squared norm.
        gap = (2.0 * delta.len() as f64).sqrt();

        match probability_decay(&probs, i, graph.csr(), config.decay_hops, config.decay_ratio)? {
            Some(next) => probs = next,
            None => {
                exhausted = true;
                break;
            }
        }
        if gap >= config.sigma {
            break;
        }
    }

    if exhausted && gap < config.sigma {
        warn!(
            "perturbation exhausted after {} nodes with gap {gap:.4} below threshold {:.4}",
            touched.len(),
            config.sigma
        );
    }

    let mut added = Vec::new();
    let mut removed = Vec::new();
    for &(u, v) in &delta {
        if graph.csr().contains_edge(u, v) {
            removed.push((u, v));
        } else {
            added.push((u, v));
        }
    }
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| adj[u].iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
        .collect();
    let a_p = Csr::from_undirected_edges(n, &edges)?;

    Ok(PerturbedGraph { x_p, a_p, touched, gap, exhausted, added, removed })
}
