//! Glue that turns a graph into the precomputed artifacts training
//! consumes: propagation scores, the TIG profile with its weight
//! schedule, contrastive pair sets, and a perturbation config.

use crate::distance::{self, DistanceConfig, DistanceInputs, PairIndices, PairSets};
use crate::error::Error;
use crate::exec::ExecMode;
use crate::graph::{Csr, Graph};
use crate::label_prop::{self, LpConfig, LpResult};
use crate::linalg::DenseMatrix;
use crate::perturb::PerturbConfig;
use crate::tig::{self, TigProfile};

type Result<T> = std::result::Result<T, Error>;

/// Everything the analysis stage needs beyond the graph itself.
#[derive(Clone, Debug)]
pub struct ArtifactParams {
    pub lp: LpConfig,
    /// Clarity weight in the TIG score.
    pub lambda: f64,
    /// Weight schedule band.
    pub w_min: f64,
    pub w_max: f64,
    pub distance: DistanceConfig,
    /// Pair slice boundaries; `None` picks bounds that fit the ranking.
    pub indices: Option<PairIndices>,
}

impl Default for ArtifactParams {
    fn default() -> ArtifactParams {
        ArtifactParams {
            lp: LpConfig::default(),
            lambda: 0.1,
            w_min: 1.0,
            w_max: 2.0,
            distance: DistanceConfig::default(),
            indices: None,
        }
    }
}

impl ArtifactParams {
    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        self.distance.validate()?;
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clarity weight must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.w_min.is_finite() && self.w_max.is_finite() && self.w_min <= self.w_max) {
            return Err(Error::InvalidParameter(format!(
                "weight band must be finite with w_min <= w_max, got [{}, {}]",
                self.w_min, self.w_max
            )));
        }
        Ok(())
    }
}

/// Precomputed training artifacts. Everything here comes from the clean
/// graph; `params` is retained so the optional per-epoch recompute can
/// rebuild the same artifacts on a perturbed view.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub profile: TigProfile,
    pub pairs: PairSets,
    pub perturb: PerturbConfig,
    pub params: ArtifactParams,
}

impl Analysis {
    /// The flat loss weight used by the uniform-contrastive mode: the
    /// midpoint of the schedule band.
    pub fn uniform_weight(&self) -> f64 {
        0.5 * (self.params.w_min + self.params.w_max)
    }
}

/// Runs propagation, scoring, and pair sampling against an arbitrary
/// graph view. Shared by the clean-graph analysis and the per-epoch
/// recompute ablation.
pub fn artifacts_on(
    csr: &Csr,
    features: &DenseMatrix,
    labels: &[Option<usize>],
    train_mask: &[bool],
    num_classes: usize,
    params: &ArtifactParams,
    seed: u64,
    mode: ExecMode,
) -> Result<(LpResult, TigProfile, PairSets)> {
    params.validate()?;
    let lp = label_prop::run_on(csr, features, labels, train_mask, num_classes, &params.lp, mode)?;
    let profile = tig::profile(&lp.z_star, params.lambda, params.w_min, params.w_max)?;
    let ranking_len = csr.n().saturating_sub(1).min(params.distance.pool_size);
    let indices = match params.indices {
        Some(ix) => ix,
        None => PairIndices::default_for(ranking_len)?,
    };
    let inputs = DistanceInputs {
        csr,
        features,
        z_star: &lp.z_star,
    };
    let pairs = distance::sample_pairs(&inputs, &params.distance, indices, seed, mode)?;
    Ok((lp, profile, pairs))
}

/// Full clean-graph analysis. When `perturb` is `None` the perturbation
/// config derives its threshold from the graph's edge count.
pub fn compute_analysis(
    graph: &Graph,
    params: &ArtifactParams,
    perturb: Option<PerturbConfig>,
    seed: u64,
    mode: ExecMode,
) -> Result<(LpResult, Analysis)> {
    let (lp, profile, pairs) = artifacts_on(
        graph.csr(),
        graph.features(),
        graph.labels(),
        graph.train_mask(),
        graph.num_classes(),
        params,
        seed,
        mode,
    )?;
    let perturb = match perturb {
        Some(cfg) => {
            cfg.validate()?;
            cfg
        }
        None => PerturbConfig::for_graph(graph, seed),
    };
    let analysis = Analysis {
        profile,
        pairs,
        perturb,
        params: params.clone(),
    };
    Ok((lp, analysis))
}
