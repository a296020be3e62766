//! Personalized-PageRank style label propagation with restart, plus the
//! prototype-based adjustment that turns raw scores into class-affinity
//! scores.
//!
//! The fixed point solved here is `Z = (1 - alpha) * A' * Z + alpha * Z0`
//! where `A'` is the column-normalized adjacency and `Z0` carries one-hot
//! rows for train-labeled nodes. Damped iteration converges geometrically
//! with ratio `1 - alpha`, so the distance to the true fixed point is at
//! most `(1 - alpha) / alpha` times the last step size.

use log::warn;

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::graph::{Csr, Graph, NormKind, NormalizedAdjacency};
use crate::linalg::{self, DenseMatrix};

/// Propagation settings.
#[derive(Clone, Copy, Debug)]
pub struct LpConfig {
    /// Restart probability; the fraction of each update pinned to the seeds.
    pub alpha: f64,
    /// Iteration budget before giving up.
    pub max_iter: usize,
    /// Convergence threshold on the max absolute change per sweep.
    pub tol: f64,
}

impl Default for LpConfig {
    fn default() -> LpConfig {
        LpConfig { alpha: 0.15, max_iter: 1000, tol: 1e-8 }
    }
}

impl LpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "restart probability must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Everything the rest of the pipeline consumes from propagation.
#[derive(Clone, Debug)]
pub struct LpResult {
    /// Raw propagation scores, one row per node, one column per class.
    pub z: DenseMatrix,
    /// Prototype-adjusted scores.
    pub z_star: DenseMatrix,
    /// Per-class mean feature vectors over train-labeled nodes.
    pub prototypes: DenseMatrix,
    /// Sweeps the solver actually ran.
    pub iterations: usize,
}

/// Builds the seed matrix: one-hot rows for train-labeled nodes, zero rows
/// everywhere else.
pub fn initial_scores(labels: &[Option<usize>], train_mask: &[bool], num_classes: usize) -> DenseMatrix {
    let mut z0 = DenseMatrix::zeros(labels.len(), num_classes);
    for (i, lab) in labels.iter().enumerate() {
        if train_mask[i] {
            if let Some(c) = lab {
                z0.row_mut(i)[*c] = 1.0;
            }
        }
    }
    z0
}

/// Damped power iteration to the restart fixed point. Returns the score
/// matrix and the number of sweeps taken.
pub fn propagate(
    adj: &NormalizedAdjacency,
    z0: &DenseMatrix,
    config: &LpConfig,
    mode: ExecMode,
) -> Result<(DenseMatrix, usize)> {
    config.validate()?;
    assert_eq!(adj.kind(), NormKind::Column, "propagation expects the column-normalized adjacency");
    if adj.n() != z0.rows() {
        return Err(Error::InvalidParameter(format!(
            "seed matrix has {} rows for {} nodes",
            z0.rows(),
            adj.n()
        )));
    }
    let alpha = config.alpha;
    let mut z = z0.clone();
    let mut residual = f64::INFINITY;
    for iter in 1..=config.max_iter {
        let mut next = adj.matmul(&z, mode);
        next.scale(1.0 - alpha);
        next.add_scaled(z0, alpha);
        residual = next.max_abs_diff(&z);
        z = next;
        if residual <= config.tol {
            return Ok((z, iter));
        }
    }
    Err(Error::NonConvergence { iterations: config.max_iter, residual })
}

/// Sequential twin of [`propagate`] with an identical result bit for bit.
pub fn propagate_seq(
    adj: &NormalizedAdjacency,
    z0: &DenseMatrix,
    config: &LpConfig,
) -> Result<(DenseMatrix, usize)> {
    propagate(adj, z0, config, ExecMode::Sequential)
}

/// Per-class mean feature vectors over train-labeled nodes. A class with no
/// training examples gets a zero row and a warning.
pub fn class_prototypes(graph: &Graph) -> DenseMatrix {
    prototypes_from_parts(graph.features(), graph.labels(), graph.train_mask(), graph.num_classes())
}

fn prototypes_from_parts(
    features: &DenseMatrix,
    labels: &[Option<usize>],
    train_mask: &[bool],
    num_classes: usize,
) -> DenseMatrix {
    let mut proto = DenseMatrix::zeros(num_classes, features.cols());
    let mut counts = vec![0usize; num_classes];
    for (i, lab) in labels.iter().enumerate() {
        if !train_mask[i] {
            continue;
        }
        if let Some(c) = lab {
            counts[*c] += 1;
            for (d, s) in proto.row_mut(*c).iter_mut().zip(features.row(i).iter()) {
                *d += s;
            }
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            warn!("class {c} has no training examples; its prototype stays zero");
        } else {
            let inv = 1.0 / count as f64;
            for v in proto.row_mut(c).iter_mut() {
                *v *= inv;
            }
        }
    }
    proto
}

/// Reweights each score by feature-prototype agreement:
/// `Z*[i][c] = 0.5 * Z[i][c] * (1 + cos(X_i, P_c))`.
///
/// A zero-norm feature row or prototype contributes cosine 0, so the factor
/// bottoms out at one half rather than discarding the score.
pub fn adjust_with_prototypes(
    z: &DenseMatrix,
    features: &DenseMatrix,
    prototypes: &DenseMatrix,
    mode: ExecMode,
) -> DenseMatrix {
    assert_eq!(z.rows(), features.rows(), "score and feature row counts disagree");
    assert_eq!(z.cols(), prototypes.rows(), "class count and prototype count disagree");
    let k = z.cols();
    let mut out = DenseMatrix::zeros(z.rows(), k);
    crate::exec::fill_rows(mode, out.data_mut(), k, |i, chunk| {
        let x = features.row(i);
        let zr = z.row(i);
        for c in 0..k {
            let cos = linalg::cosine(x, prototypes.row(c));
            chunk[c] = 0.5 * zr[c] * (1.0 + cos);
        }
    });
    out
}

/// Full propagation pass over an attributed graph.
pub fn run(graph: &Graph, config: &LpConfig, mode: ExecMode) -> Result<LpResult> {
    run_on(
        graph.csr(),
        graph.features(),
        graph.labels(),
        graph.train_mask(),
        graph.num_classes(),
        config,
        mode,
    )
}

/// Propagation over explicit parts. Used when the structure under analysis
/// is not the graph that owns the features (a perturbed copy, say).
pub fn run_on(
    csr: &Csr,
    features: &DenseMatrix,
    labels: &[Option<usize>],
    train_mask: &[bool],
    num_classes: usize,
    config: &LpConfig,
    mode: ExecMode,
) -> Result<LpResult> {
    if num_classes < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 classes, got {num_classes}")));
    }
    let adj = NormalizedAdjacency::from_csr(csr, NormKind::Column);
    let z0 = initial_scores(labels, train_mask, num_classes);
    let (z, iterations) = propagate(&adj, &z0, config, mode)?;
    let prototypes = prototypes_from_parts(features, labels, train_mask, num_classes);
    let z_star = adjust_with_prototypes(&z, features, &prototypes, mode);
    Ok(LpResult { z, z_star, prototypes, iterations })
}
