//! Model parameters, the forward pass, and the exact backward pass for
//! one training step.

use rand::Rng;

use crate::error::Error;
use crate::exec::{self, ExecMode};
use crate::graph::NormalizedAdjacency;
use crate::linalg::DenseMatrix;
use crate::rng;

use super::loss;
use super::Mode;
use crate::distance::PairSets;

/// Two-layer GCN weights plus a frozen snapshot used as the contrastive
/// target. No bias terms.
#[derive(Clone, Debug)]
pub struct GcnModel {
    pub w0: DenseMatrix,
    pub w1: DenseMatrix,
    pub frozen_w0: DenseMatrix,
    pub frozen_w1: DenseMatrix,
}

impl GcnModel {
    /// Xavier-uniform initialization: each layer is drawn from
    /// U(-b, b) with b = sqrt(6 / (fan_in + fan_out)), using one seeded
    /// stream per layer. The frozen copy starts equal to the live weights.
    pub fn init(num_features: usize, hidden: usize, num_classes: usize, seed: u64) -> GcnModel {
        let w0 = xavier(num_features, hidden, rng::stream(seed, "init", 0));
        let w1 = xavier(hidden, num_classes, rng::stream(seed, "init", 1));
        GcnModel {
            frozen_w0: w0.clone(),
            frozen_w1: w1.clone(),
            w0,
            w1,
        }
    }

    /// Copies the live weights into the frozen snapshot.
    pub fn refresh_frozen(&mut self) {
        self.frozen_w0 = self.w0.clone();
        self.frozen_w1 = self.w1.clone();
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.cols()
    }
}

fn xavier(rows: usize, cols: usize, mut rng: impl Rng) -> DenseMatrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = DenseMatrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.gen_range(-bound..bound);
    }
    m
}

/// Inverted-dropout scale matrix: kept entries carry 1/(1-p), dropped
/// entries carry 0, so the expected activation is unchanged and
/// evaluation needs no rescaling.
#[derive(Clone, Debug)]
pub struct DropoutMask {
    scale: DenseMatrix,
}

impl DropoutMask {
    pub fn draw(rows: usize, cols: usize, p: f64, rng: &mut impl Rng) -> DropoutMask {
        let keep_scale = 1.0 / (1.0 - p);
        let mut scale = DenseMatrix::zeros(rows, cols);
        for v in scale.data_mut() {
            *v = if rng.gen::<f64>() < p { 0.0 } else { keep_scale };
        }
        DropoutMask { scale }
    }

    /// A mask that keeps everything, for tests that need a fixed step.
    pub fn identity(rows: usize, cols: usize) -> DropoutMask {
        let mut scale = DenseMatrix::zeros(rows, cols);
        for v in scale.data_mut() {
            *v = 1.0;
        }
        DropoutMask { scale }
    }

    pub fn scale(&self) -> &DenseMatrix {
        &self.scale
    }
}

/// Intermediate products of one forward pass, retained for the backward
/// pass. `u` and `v` are the aggregated inputs to each layer, `pre_act`
/// the first-layer pre-activation.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub u: DenseMatrix,
    pub pre_act: DenseMatrix,
    pub v: DenseMatrix,
    pub probs: DenseMatrix,
    pub logp: DenseMatrix,
}

/// Forward pass g = softmax(A (dropout(relu(A X W0))) W1) with the
/// symmetric-normalized adjacency A. Passing `dropout: None` runs in
/// evaluation mode.
pub fn forward(
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    w0: &DenseMatrix,
    w1: &DenseMatrix,
    dropout: Option<&DropoutMask>,
    mode: ExecMode,
) -> ForwardCache {
    let u = adj.matmul(x, mode);
    let pre_act = u.matmul_with(w0, mode);
    let mut hidden = pre_act.clone();
    for v in hidden.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    if let Some(mask) = dropout {
        let scale = mask.scale().data();
        for (h, s) in hidden.data_mut().iter_mut().zip(scale) {
            *h *= s;
        }
    }
    let v = adj.matmul(&hidden, mode);
    let logits = v.matmul_with(w1, mode);
    let logp = log_softmax_rows(&logits, mode);
    let mut probs = logp.clone();
    for p in probs.data_mut() {
        *p = p.exp();
    }
    ForwardCache {
        u,
        pre_act,
        v,
        probs,
        logp,
    }
}

fn log_softmax_rows(logits: &DenseMatrix, mode: ExecMode) -> DenseMatrix {
    let k = logits.cols();
    let mut out = DenseMatrix::zeros(logits.rows(), k);
    exec::fill_rows(mode, out.data_mut(), k, |i, row| {
        crate::linalg::log_softmax_into(logits.row(i), row);
    });
    out
}

/// Everything one gradient step reads besides the parameters. The dropout
/// masks are explicit so a finite-difference probe can re-evaluate the
/// loss with the exact same randomness.
pub struct StepInputs<'a> {
    pub adj_clean: &'a NormalizedAdjacency,
    pub x_clean: &'a DenseMatrix,
    pub labels: &'a [Option<usize>],
    pub train_mask: &'a [bool],
    pub num_classes: usize,
    /// Perturbed view: normalized adjacency and features. Required for the
    /// contrastive modes, ignored for the baseline.
    pub pert: Option<(&'a NormalizedAdjacency, &'a DenseMatrix)>,
    pub pairs: Option<&'a PairSets>,
    /// Per-node loss weights w_i. Required for the contrastive modes.
    pub weights: Option<&'a [f64]>,
    pub mu1: f64,
    pub mu2: f64,
    pub mask_clean: Option<&'a DropoutMask>,
    pub mask_pert: Option<&'a DropoutMask>,
}

#[derive(Clone, Copy, Debug)]
pub struct LossParts {
    pub total: f64,
    pub ce: f64,
    /// The unsupervised contribution actually added to the total:
    /// mean over nodes of w_i * L_U^i. Zero for the baseline.
    pub unsup_weighted_mean: f64,
}

#[derive(Clone, Debug)]
pub struct Gradients {
    pub w0: DenseMatrix,
    pub w1: DenseMatrix,
}

/// One full loss-and-gradient evaluation at the given parameters. The
/// frozen weights enter only through the contrastive targets; no gradient
/// is produced for them.
pub fn compute_step(
    inputs: &StepInputs<'_>,
    w0: &DenseMatrix,
    w1: &DenseMatrix,
    frozen_w0: &DenseMatrix,
    frozen_w1: &DenseMatrix,
    mode: Mode,
    exec_mode: ExecMode,
) -> Result<(LossParts, Gradients), Error> {
    let n = inputs.x_clean.rows();
    let k = inputs.num_classes;
    let clean = forward(
        inputs.adj_clean,
        inputs.x_clean,
        w0,
        w1,
        inputs.mask_clean,
        exec_mode,
    );
    let ce = loss::ce_loss(&clean.logp, inputs.labels, inputs.train_mask)?;

    // Cross-entropy gradient on the clean branch: (p - y) / |L| on
    // labeled training rows, zero elsewhere.
    let num_train = inputs.train_mask.iter().filter(|m| **m).count();
    let mut d_logits_clean = DenseMatrix::zeros(n, k);
    for i in 0..n {
        if !inputs.train_mask[i] {
            continue;
        }
        let y = inputs.labels[i].ok_or_else(|| {
            Error::Data(format!("train mask selects unlabeled node {i}"))
        })?;
        let p = clean.probs.row(i);
        let row = d_logits_clean.row_mut(i);
        for c in 0..k {
            row[c] = p[c] / num_train as f64;
        }
        row[y] -= 1.0 / num_train as f64;
    }
    let mut grads = backward_branch(
        inputs.adj_clean,
        &clean,
        w1,
        &d_logits_clean,
        inputs.mask_clean,
        exec_mode,
    );

    let mut unsup_weighted_mean = 0.0;
    if mode != Mode::Baseline {
        let (adj_pert, x_pert) = inputs.pert.ok_or_else(|| {
            Error::InvalidParameter("contrastive step requires a perturbed view".into())
        })?;
        let pairs = inputs.pairs.ok_or_else(|| {
            Error::InvalidParameter("contrastive step requires pair sets".into())
        })?;
        let weights = inputs.weights.ok_or_else(|| {
            Error::InvalidParameter("contrastive step requires loss weights".into())
        })?;
        if weights.len() != n || pairs.positives.len() != n {
            return Err(Error::InvalidParameter(format!(
                "loss weights and pair sets must cover all {n} nodes"
            )));
        }
        let pert = forward(adj_pert, x_pert, w0, w1, inputs.mask_pert, exec_mode);
        let frozen = forward(
            inputs.adj_clean,
            inputs.x_clean,
            frozen_w0,
            frozen_w1,
            None,
            exec_mode,
        );

        // Gradient of each KL(p_i || q) w.r.t. the perturbed logits row i is
        // p .* (s - KL) with s = ln p_i - ln q; q rows are frozen constants.
        let mut d_logits_pert = DenseMatrix::zeros(n, k);
        for i in 0..n {
            let p = pert.probs.row(i);
            let lp = pert.logp.row(i);
            let w_scale = weights[i] / n as f64;

            let mut l_u = 0.0;
            {
                let mut accumulate = |coef: f64, lq: &[f64]| -> f64 {
                    let mut kl = 0.0;
                    for c in 0..k {
                        kl += p[c] * (lp[c] - lq[c]);
                    }
                    let row = d_logits_pert.row_mut(i);
                    for c in 0..k {
                        row[c] += coef * p[c] * (lp[c] - lq[c] - kl);
                    }
                    kl
                };

                let kl_self = accumulate(w_scale, frozen.logp.row(i));
                l_u += kl_self;

                let pos = &pairs.positives[i];
                if !pos.is_empty() {
                    let coef = w_scale * inputs.mu2 / pos.len() as f64;
                    let mut mean = 0.0;
                    for &j in pos {
                        mean += accumulate(coef, frozen.logp.row(j));
                    }
                    l_u += inputs.mu2 * mean / pos.len() as f64;
                }
                let neg = &pairs.negatives[i];
                if !neg.is_empty() {
                    let coef = -w_scale * inputs.mu2 * inputs.mu1 / neg.len() as f64;
                    let mut mean = 0.0;
                    for &j in neg {
                        mean += accumulate(coef, frozen.logp.row(j));
                    }
                    l_u -= inputs.mu2 * inputs.mu1 * mean / neg.len() as f64;
                }
            }
            unsup_weighted_mean += weights[i] * l_u / n as f64;
        }
        let pert_grads =
            backward_branch(adj_pert, &pert, w1, &d_logits_pert, inputs.mask_pert, exec_mode);
        grads.w0.add_scaled(&pert_grads.w0, 1.0);
        grads.w1.add_scaled(&pert_grads.w1, 1.0);
    }

    let parts = LossParts {
        total: ce + unsup_weighted_mean,
        ce,
        unsup_weighted_mean,
    };
    Ok((parts, grads))
}

/// Reverse pass through one branch given the gradient at the logits.
/// Softmax backprop is already folded into `d_logits` by the callers.
fn backward_branch(
    adj: &NormalizedAdjacency,
    cache: &ForwardCache,
    w1: &DenseMatrix,
    d_logits: &DenseMatrix,
    mask: Option<&DropoutMask>,
    exec_mode: ExecMode,
) -> Gradients {
    let gw1 = cache.v.transpose_matmul(d_logits, exec_mode);
    let dv = d_logits.matmul_transpose_b(w1, exec_mode);
    // The adjacency is symmetric, so its transpose is itself.
    let mut d_pre = adj.matmul(&dv, exec_mode);
    if let Some(mask) = mask {
        for (d, s) in d_pre.data_mut().iter_mut().zip(mask.scale().data()) {
            *d *= s;
        }
    }
    for (d, a) in d_pre.data_mut().iter_mut().zip(cache.pre_act.data()) {
        if *a <= 0.0 {
            *d = 0.0;
        }
    }
    Gradients {
        w0: cache.u.transpose_matmul(&d_pre, exec_mode),
        w1: gw1,
    }
}
