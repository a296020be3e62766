//! Two-layer graph convolutional network with exact reverse-mode
//! gradients, the contrastive loss stack, Adam, and the training loop.
//!
//! The training step holds two parameter sets: the live one receiving
//! updates and a frozen snapshot refreshed once per epoch. Contrastive
//! targets always come from the frozen copy evaluated on the clean graph,
//! and no gradient ever flows through it.

mod adam;
mod loss;
mod model;
mod train;

pub use adam::AdamState;
pub use loss::{
    ce_loss, kl_row, pairwise_loss, self_consistency_loss, total_loss, unsupervised_loss,
};
pub use model::{compute_step, forward, DropoutMask, ForwardCache, GcnModel, Gradients, LossParts, StepInputs};
pub use train::{evaluate, train, EpochMetrics, MetricsLog, TrainConfig};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which loss terms and weightings a training run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Supervised cross-entropy only; no perturbation, no contrastive terms.
    #[serde(rename = "baseline")]
    Baseline,
    /// Full contrastive objective with a flat weight (the midpoint of the
    /// schedule band) and uniform perturbation selection.
    #[serde(rename = "uniform-gcl")]
    UniformGcl,
    /// Full objective with the rank-scheduled weights driving both the loss
    /// and the perturbation selection.
    #[serde(rename = "tifa-gcl")]
    TifaGcl,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Baseline => "baseline",
            Mode::UniformGcl => "uniform-gcl",
            Mode::TifaGcl => "tifa-gcl",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode, Error> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "uniform-gcl" => Ok(Mode::UniformGcl),
            "tifa-gcl" => Ok(Mode::TifaGcl),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode '{other}'; expected baseline, uniform-gcl, or tifa-gcl"
            ))),
        }
    }
}
