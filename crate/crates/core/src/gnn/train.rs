//! The training loop: per-epoch frozen-snapshot refresh, fresh graph
//! perturbation, composite loss, Adam, LR decay, and validation-based
//! early stopping with best-epoch parameter restore.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::distance::PairSets;
use crate::error::Error;
use crate::exec::ExecMode;
use crate::graph::{Graph, NormKind, NormalizedAdjacency};
use crate::linalg::DenseMatrix;
use crate::perturb;
use crate::pipeline::{self, Analysis};
use crate::rng;

use super::adam::AdamState;
use super::model::{compute_step, forward, DropoutMask, GcnModel, StepInputs};
use super::Mode;

type Result<T> = std::result::Result<T, Error>;

/// Hyperparameters of one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub min_epochs: usize,
    pub patience: usize,
    /// Multiplicative decay applied to the learning rate each epoch after
    /// `lr_decay_after`.
    pub lr_decay: f64,
    pub lr_decay_after: usize,
    /// Weight of the negative-pair term inside the pairwise loss.
    pub mu1: f64,
    /// Weight of the pairwise term inside the per-node unsupervised loss.
    pub mu2: f64,
    pub hidden: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Recompute propagation, scores, and pairs from the perturbed view
    /// each epoch instead of reusing the clean-graph artifacts. Ablation
    /// switch; off by default.
    pub recompute_artifacts: bool,
}

impl TrainConfig {
    pub fn with_mode(mode: Mode, seed: u64) -> TrainConfig {
        TrainConfig {
            lr: 0.0075,
            dropout: 0.5,
            weight_decay: 0.005,
            max_epochs: 200,
            min_epochs: 30,
            patience: 20,
            lr_decay: 0.95,
            lr_decay_after: 30,
            mu1: 0.33,
            mu2: 0.1,
            hidden: 64,
            mode,
            seed,
            recompute_artifacts: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        if self.min_epochs == 0 || self.max_epochs < self.min_epochs {
            return Err(Error::InvalidParameter(format!(
                "epoch bounds need 1 <= min <= max, got min={} max={}",
                self.min_epochs, self.max_epochs
            )));
        }
        if self.patience == 0 {
            return Err(Error::InvalidParameter("patience must be at least 1".into()));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lr decay must be in (0, 1], got {}",
                self.lr_decay
            )));
        }
        if !(self.mu1 >= 0.0) || !(self.mu2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "loss mixing weights must be nonnegative, got mu1={} mu2={}",
                self.mu1, self.mu2
            )));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidParameter("hidden width must be at least 1".into()));
        }
        Ok(())
    }

    fn lr_at(&self, epoch: usize) -> f64 {
        let excess = epoch.saturating_sub(self.lr_decay_after);
        self.lr * self.lr_decay.powi(excess as i32)
    }
}

/// One line of the training log. Losses are measured at the parameters
/// the epoch started with; accuracies are measured after its update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub loss_ce: f64,
    /// Mean over nodes of w_i * L_U^i, the term actually added to the
    /// total loss. Zero in baseline mode.
    pub loss_unsup_mean: f64,
    pub val_acc: f64,
    pub test_acc: f64,
}

/// Full per-epoch history plus the best-validation summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsLog {
    pub epochs: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    pub best_test_acc: f64,
}

impl MetricsLog {
    /// Writes one JSON object per epoch, newline separated.
    pub fn write_jsonl(&self, out: &mut impl Write) -> io::Result<()> {
        for epoch in &self.epochs {
            let line = serde_json::to_string(epoch).map_err(io::Error::other)?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

fn mask_count(mask: &[bool]) -> usize {
    mask.iter().filter(|m| **m).count()
}

/// Trains a fresh model on the graph using the precomputed artifacts.
/// Returns the parameters from the best validation epoch together with
/// the full metric history.
pub fn train(
    graph: &Graph,
    analysis: &Analysis,
    config: &TrainConfig,
    exec_mode: ExecMode,
) -> Result<(GcnModel, MetricsLog)> {
    config.validate()?;
    let n = graph.n();
    let k = graph.num_classes();
    if mask_count(graph.train_mask()) == 0 {
        return Err(Error::InvalidParameter(
            "training requires a nonempty train mask".into(),
        ));
    }
    if mask_count(graph.val_mask()) == 0 || mask_count(graph.test_mask()) == 0 {
        return Err(Error::InvalidParameter(
            "training requires nonempty validation and test masks".into(),
        ));
    }
    if config.mode != Mode::Baseline
        && (analysis.profile.weights.len() != n || analysis.pairs.positives.len() != n)
    {
        return Err(Error::InvalidParameter(
            "analysis artifacts do not cover every node of the graph".into(),
        ));
    }

    let adj_clean = graph.normalized(NormKind::Symmetric);
    let mut model = GcnModel::init(graph.num_features(), config.hidden, k, config.seed);
    let mut adam = AdamState::new(model.w0.data().len(), model.w1.data().len());

    let mut epochs = Vec::with_capacity(config.max_epochs);
    let mut best_val = f64::NEG_INFINITY;
    let mut best_test = 0.0;
    let mut best_epoch = 0usize;
    let mut best_w0 = model.w0.clone();
    let mut best_w1 = model.w1.clone();
    let mut since_improve = 0usize;

    for epoch in 1..=config.max_epochs {
        model.refresh_frozen();
        let lr = config.lr_at(epoch);
        let mut dropout_rng = rng::stream(config.seed, "dropout", epoch as u64);
        let draw_mask = |rng: &mut rand_chacha::ChaCha8Rng| {
            if config.dropout > 0.0 {
                Some(DropoutMask::draw(n, config.hidden, config.dropout, rng))
            } else {
                None
            }
        };
        let mask_clean = draw_mask(&mut dropout_rng);

        let parts;
        let grads;
        if config.mode == Mode::Baseline {
            let inputs = StepInputs {
                adj_clean: &adj_clean,
                x_clean: graph.features(),
                labels: graph.labels(),
                train_mask: graph.train_mask(),
                num_classes: k,
                pert: None,
                pairs: None,
                weights: None,
                mu1: config.mu1,
                mu2: config.mu2,
                mask_clean: mask_clean.as_ref(),
                mask_pert: None,
            };
            let out = compute_step(
                &inputs,
                &model.w0,
                &model.w1,
                &model.frozen_w0,
                &model.frozen_w1,
                config.mode,
                exec_mode,
            )?;
            parts = out.0;
            grads = out.1;
        } else {
            let mask_pert = draw_mask(&mut dropout_rng);
            let mut pert_cfg = analysis.perturb.clone();
            pert_cfg.seed = rng::derive(config.seed, "perturb", epoch as u64);
            let selection_weights: Vec<f64> = match config.mode {
                Mode::UniformGcl => vec![1.0; n],
                Mode::TifaGcl => analysis.profile.weights.clone(),
                Mode::Baseline => unreachable!(),
            };
            let pert = perturb::perturb(graph, &selection_weights, &pert_cfg)?;
            let adj_pert = NormalizedAdjacency::from_csr(&pert.a_p, NormKind::Symmetric);

            let recomputed: Option<(Vec<f64>, PairSets)> = if config.recompute_artifacts {
                let (_, profile_e, pairs_e) = pipeline::artifacts_on(
                    &pert.a_p,
                    &pert.x_p,
                    graph.labels(),
                    graph.train_mask(),
                    k,
                    &analysis.params,
                    rng::derive(config.seed, "recompute", epoch as u64),
                    exec_mode,
                )?;
                Some((profile_e.weights, pairs_e))
            } else {
                None
            };
            let loss_weights: Vec<f64> = match config.mode {
                Mode::UniformGcl => vec![analysis.uniform_weight(); n],
                Mode::TifaGcl => match &recomputed {
                    Some((w, _)) => w.clone(),
                    None => analysis.profile.weights.clone(),
                },
                Mode::Baseline => unreachable!(),
            };
            let pairs: &PairSets = match &recomputed {
                Some((_, p)) => p,
                None => &analysis.pairs,
            };

            let inputs = StepInputs {
                adj_clean: &adj_clean,
                x_clean: graph.features(),
                labels: graph.labels(),
                train_mask: graph.train_mask(),
                num_classes: k,
                pert: Some((&adj_pert, &pert.x_p)),
                pairs: Some(pairs),
                weights: Some(&loss_weights),
                mu1: config.mu1,
                mu2: config.mu2,
                mask_clean: mask_clean.as_ref(),
                mask_pert: mask_pert.as_ref(),
            };
            let out = compute_step(
                &inputs,
                &model.w0,
                &model.w1,
                &model.frozen_w0,
                &model.frozen_w1,
                config.mode,
                exec_mode,
            )?;
            parts = out.0;
            grads = out.1;
        }

        if !parts.total.is_finite() {
            return Err(Error::Divergence {
                epoch,
                message: format!(
                    "loss became non-finite (ce={}, unsup={})",
                    parts.ce, parts.unsup_weighted_mean
                ),
            });
        }

        adam.step(
            &mut model.w0,
            &mut model.w1,
            &grads.w0,
            &grads.w1,
            lr,
            config.weight_decay,
        );

        let eval = forward(
            &adj_clean,
            graph.features(),
            &model.w0,
            &model.w1,
            None,
            exec_mode,
        );
        let preds = argmax_rows(&eval.probs);
        let val_acc = masked_accuracy(&preds, graph.labels(), graph.val_mask())?;
        let test_acc = masked_accuracy(&preds, graph.labels(), graph.test_mask())?;

        epochs.push(EpochMetrics {
            epoch,
            lr,
            loss_ce: parts.ce,
            loss_unsup_mean: parts.unsup_weighted_mean,
            val_acc,
            test_acc,
        });

        if val_acc > best_val {
            best_val = val_acc;
            best_test = test_acc;
            best_epoch = epoch;
            best_w0 = model.w0.clone();
            best_w1 = model.w1.clone();
            since_improve = 0;
        } else {
            since_improve += 1;
        }
        if epoch >= config.min_epochs && since_improve >= config.patience {
            break;
        }
    }

    model.w0 = best_w0;
    model.w1 = best_w1;
    model.refresh_frozen();
    let log = MetricsLog {
        epochs,
        best_epoch,
        best_val_acc: best_val,
        best_test_acc: best_test,
    };
    Ok((model, log))
}

/// Row-wise argmax with ties resolved to the smallest class id.
fn argmax_rows(probs: &DenseMatrix) -> Vec<usize> {
    (0..probs.rows())
        .map(|i| {
            let row = probs.row(i);
            let mut best = 0usize;
            for (c, v) in row.iter().enumerate().skip(1) {
                if *v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn masked_accuracy(preds: &[usize], labels: &[Option<usize>], mask: &[bool]) -> Result<f64> {
    let mut total = 0usize;
    let mut correct = 0usize;
    for i in 0..preds.len() {
        if !mask[i] {
            continue;
        }
        let y = labels[i]
            .ok_or_else(|| Error::Data(format!("evaluation mask selects unlabeled node {i}")))?;
        total += 1;
        if preds[i] == y {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidParameter(
            "evaluation mask selects no nodes".into(),
        ));
    }
    Ok(correct as f64 / total as f64)
}

/// Runs the model on the clean graph in evaluation mode and scores the
/// masked nodes. Returns the accuracy and the predictions for every node.
pub fn evaluate(
    model: &GcnModel,
    graph: &Graph,
    mask: &[bool],
    exec_mode: ExecMode,
) -> Result<(f64, Vec<usize>)> {
    if mask.len() != graph.n() {
        return Err(Error::InvalidParameter(format!(
            "mask covers {} nodes but the graph has {}",
            mask.len(),
            graph.n()
        )));
    }
    let adj = graph.normalized(NormKind::Symmetric);
    let cache = forward(&adj, graph.features(), &model.w0, &model.w1, None, exec_mode);
    let preds = argmax_rows(&cache.probs);
    let acc = masked_accuracy(&preds, graph.labels(), mask)?;
    Ok((acc, preds))
}
