//! Effective run configuration.
//!
//! Values resolve in precedence order: command line flags beat the JSON
//! config file, which beats built-in defaults. The resolved struct is
//! echoed verbatim into `config.json` inside every output directory, and
//! the `sources` map records where each knob came from: `"method"` for
//! the published operating point, `"implementation"` for a choice made by
//! this implementation, `"config-file"`, or `"flag"`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use tifa_gcl::distance::DistanceConfig;
use tifa_gcl::gnn::{Mode, TrainConfig};
use tifa_gcl::graph::{self, Graph, SbmParams};
use tifa_gcl::label_prop::LpConfig;
use tifa_gcl::perturb::PerturbConfig;
use tifa_gcl::pipeline::ArtifactParams;
use tifa_gcl::sampler::SamplerConfig;

use crate::args::CommonArgs;

pub const SOURCE_METHOD: &str = "method";
pub const SOURCE_IMPLEMENTATION: &str = "implementation";
pub const SOURCE_CONFIG_FILE: &str = "config-file";
pub const SOURCE_FLAG: &str = "flag";

/// Parameters of a synthetic block-model dataset, parsed from the
/// comma-separated form `k,per_class,p_in,p_out,noise,labels_per_class`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthSpec {
    pub k: usize,
    pub per_class: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub noise: f64,
    pub labels_per_class: usize,
}

impl SynthSpec {
    pub fn to_params(&self) -> SbmParams {
        SbmParams {
            k: self.k,
            per_class: self.per_class,
            p_in: self.p_in,
            p_out: self.p_out,
            noise: self.noise,
            labels_per_class: self.labels_per_class,
        }
    }
}

impl FromStr for SynthSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<SynthSpec> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            bail!(
                "synthetic spec needs six comma-separated values \
                 (k,per_class,p_in,p_out,noise,labels_per_class), got {:?}",
                s
            );
        }
        let field = |i: usize, name: &str| -> Result<&str> {
            let p = parts[i];
            if p.is_empty() {
                bail!("synthetic spec field {name} is empty in {s:?}");
            }
            Ok(p)
        };
        Ok(SynthSpec {
            k: field(0, "k")?.parse().context("parsing k")?,
            per_class: field(1, "per_class")?.parse().context("parsing per_class")?,
            p_in: field(2, "p_in")?.parse().context("parsing p_in")?,
            p_out: field(3, "p_out")?.parse().context("parsing p_out")?,
            noise: field(4, "noise")?.parse().context("parsing noise")?,
            labels_per_class: field(5, "labels_per_class")?
                .parse()
                .context("parsing labels_per_class")?,
        })
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.k, self.per_class, self.p_in, self.p_out, self.noise, self.labels_per_class
        )
    }
}

/// Subcommand-specific switches folded into the resolved config.
#[derive(Debug, Default)]
pub struct Extra<'a> {
    pub mode: Option<&'a str>,
    pub dump_lp: bool,
    pub pairs: bool,
    pub saint: bool,
    pub perturb: bool,
}

/// The fully resolved configuration of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dataset: Option<String>,
    pub synth: Option<SynthSpec>,
    pub normalize_features: bool,
    pub seeds: Vec<u64>,
    pub modes: Vec<String>,

    pub alpha: f64,
    pub lp_max_iter: usize,
    pub lp_tol: f64,

    pub lambda: f64,
    pub w_min: f64,
    pub w_max: f64,

    pub lambda1: f64,
    pub lambda2: f64,
    pub hop_cap: usize,
    pub pool_size: usize,

    pub mu1: f64,
    pub mu2: f64,
    pub lr: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub min_epochs: usize,
    pub patience: usize,
    pub lr_decay: f64,
    pub lr_decay_after: usize,
    pub hidden: usize,
    pub recompute_artifacts: bool,

    pub sharpen_t: f64,
    /// `None` derives the budget from the edge count of each loaded graph;
    /// echoes resolve it to the value used for the first graph.
    pub sigma: Option<f64>,
    pub n_add: usize,
    pub n_rmv: usize,
    pub mask_rate: f64,
    pub decay_hops: usize,
    pub decay_ratio: f64,

    pub n_roots: usize,
    pub walk_len: usize,
    pub walk_sharpen_t: f64,
    pub epsilon: f64,

    pub grid_dim: usize,
    pub tig_bins: usize,
    pub ratio_bins: usize,

    pub dump_lp: bool,
    pub pairs: bool,
    pub saint: bool,
    pub perturb: bool,

    pub sources: BTreeMap<&'static str, &'static str>,
}

impl RunConfig {
    fn defaults(command: &str) -> RunConfig {
        let seeds = if command == "train" {
            vec![0, 1, 2, 3, 4]
        } else {
            vec![0]
        };
        let modes = match command {
            "train" => vec![
                Mode::Baseline.to_string(),
                Mode::UniformGcl.to_string(),
                Mode::TifaGcl.to_string(),
            ],
            "analyze" => vec![Mode::Baseline.to_string()],
            _ => vec![Mode::TifaGcl.to_string()],
        };
        let mut sources = BTreeMap::new();
        for key in [
            "lp_max_iter",
            "lp_tol",
            "hop_cap",
            "pool_size",
            "mu2",
            "recompute_artifacts",
            "sharpen_t",
            "sigma",
            "n_add",
            "n_rmv",
            "mask_rate",
            "decay_hops",
            "decay_ratio",
            "n_roots",
            "epsilon",
            "grid_dim",
            "tig_bins",
            "ratio_bins",
            "seeds",
            "modes",
            "normalize_features",
            "dump_lp",
            "pairs",
            "saint",
            "perturb",
        ] {
            sources.insert(key, SOURCE_IMPLEMENTATION);
        }
        for key in [
            "alpha",
            "lambda",
            "w_min",
            "w_max",
            "lambda1",
            "lambda2",
            "mu1",
            "lr",
            "dropout",
            "weight_decay",
            "max_epochs",
            "min_epochs",
            "patience",
            "lr_decay",
            "lr_decay_after",
            "hidden",
            "walk_len",
            "walk_sharpen_t",
        ] {
            sources.insert(key, SOURCE_METHOD);
        }

        let lp = LpConfig::default();
        let distance = DistanceConfig::default();
        let train = TrainConfig::with_mode(Mode::Baseline, 0);
        let perturb = PerturbConfig::for_edge_count(1, 0);
        let sampler = SamplerConfig::with_seed(0);
        RunConfig {
            command: command.to_string(),
            dataset: None,
            synth: None,
            normalize_features: false,
            seeds,
            modes,
            alpha: lp.alpha,
            lp_max_iter: lp.max_iter,
            lp_tol: lp.tol,
            lambda: 0.1,
            w_min: 1.0,
            w_max: 2.0,
            lambda1: distance.lambda1,
            lambda2: distance.lambda2,
            hop_cap: distance.hop_cap,
            pool_size: distance.pool_size,
            mu1: train.mu1,
            mu2: train.mu2,
            lr: train.lr,
            dropout: train.dropout,
            weight_decay: train.weight_decay,
            max_epochs: train.max_epochs,
            min_epochs: train.min_epochs,
            patience: train.patience,
            lr_decay: train.lr_decay,
            lr_decay_after: train.lr_decay_after,
            hidden: train.hidden,
            recompute_artifacts: train.recompute_artifacts,
            sharpen_t: perturb.sharpen_t,
            sigma: None,
            n_add: perturb.n_add,
            n_rmv: perturb.n_rmv,
            mask_rate: perturb.mask_rate,
            decay_hops: perturb.decay_hops,
            decay_ratio: perturb.decay_ratio,
            n_roots: sampler.n_roots,
            walk_len: sampler.walk_len,
            walk_sharpen_t: sampler.sharpen_t,
            epsilon: sampler.epsilon,
            grid_dim: 4,
            tig_bins: 5,
            ratio_bins: 10,
            dump_lp: false,
            pairs: false,
            saint: false,
            perturb: false,
            sources,
        }
    }

    /// Resolves the configuration for one invocation: defaults, then the
    /// config file, then flags.
    pub fn resolve(command: &str, common: &CommonArgs, extra: Extra<'_>) -> Result<RunConfig> {
        let mut rc = RunConfig::defaults(command);
        if let Some(path) = &common.config {
            rc.apply_file(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
        }
        rc.apply_flags(common)?;
        rc.apply_extra(&extra)?;
        rc.validate()?;
        Ok(rc)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text).context("parsing JSON")?;
        let Value::Object(map) = value else {
            bail!("config file must hold a JSON object");
        };
        for (key, value) in &map {
            self.apply_file_key(key, value)
                .with_context(|| format!("config key {key:?}"))?;
        }
        Ok(())
    }

    fn apply_file_key(&mut self, key: &str, value: &Value) -> Result<()> {
        fn real(value: &Value) -> Result<f64> {
            value.as_f64().ok_or_else(|| anyhow!("expected a number"))
        }
        fn count(value: &Value) -> Result<usize> {
            value
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| anyhow!("expected a nonnegative integer"))
        }
        fn boolean(value: &Value) -> Result<bool> {
            value.as_bool().ok_or_else(|| anyhow!("expected a boolean"))
        }
        fn string(value: &Value) -> Result<String> {
            value
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| anyhow!("expected a string"))
        }

        match key {
            "dataset" => self.dataset = Some(string(value)?),
            "synth" => self.synth = Some(string(value)?.parse()?),
            "normalize_features" => self.normalize_features = boolean(value)?,
            "seeds" => {
                let list = value
                    .as_array()
                    .ok_or_else(|| anyhow!("expected an array of seeds"))?;
                self.seeds = list
                    .iter()
                    .map(|v| v.as_u64().ok_or_else(|| anyhow!("seeds must be integers")))
                    .collect::<Result<_>>()?;
            }
            "mode" => self.modes = vec![string(value)?],
            "alpha" => self.alpha = real(value)?,
            "lp_max_iter" => self.lp_max_iter = count(value)?,
            "lp_tol" => self.lp_tol = real(value)?,
            "lambda" => self.lambda = real(value)?,
            "w_min" => self.w_min = real(value)?,
            "w_max" => self.w_max = real(value)?,
            "lambda1" => self.lambda1 = real(value)?,
            "lambda2" => self.lambda2 = real(value)?,
            "hop_cap" => self.hop_cap = count(value)?,
            "pool_size" => self.pool_size = count(value)?,
            "mu1" => self.mu1 = real(value)?,
            "mu2" => self.mu2 = real(value)?,
            "lr" => self.lr = real(value)?,
            "dropout" => self.dropout = real(value)?,
            "weight_decay" => self.weight_decay = real(value)?,
            "max_epochs" => self.max_epochs = count(value)?,
            "min_epochs" => self.min_epochs = count(value)?,
            "patience" => self.patience = count(value)?,
            "lr_decay" => self.lr_decay = real(value)?,
            "lr_decay_after" => self.lr_decay_after = count(value)?,
            "hidden" => self.hidden = count(value)?,
            "recompute_artifacts" => self.recompute_artifacts = boolean(value)?,
            "sharpen_t" => self.sharpen_t = real(value)?,
            "sigma" => self.sigma = Some(real(value)?),
            "n_add" => self.n_add = count(value)?,
            "n_rmv" => self.n_rmv = count(value)?,
            "mask_rate" => self.mask_rate = real(value)?,
            "decay_hops" => self.decay_hops = count(value)?,
            "decay_ratio" => self.decay_ratio = real(value)?,
            "n_roots" => self.n_roots = count(value)?,
            "walk_len" => self.walk_len = count(value)?,
            "walk_sharpen_t" => self.walk_sharpen_t = real(value)?,
            "epsilon" => self.epsilon = real(value)?,
            "grid_dim" => self.grid_dim = count(value)?,
            "tig_bins" => self.tig_bins = count(value)?,
            "ratio_bins" => self.ratio_bins = count(value)?,
            "dump_lp" => self.dump_lp = boolean(value)?,
            "pairs" => self.pairs = boolean(value)?,
            "saint" => self.saint = boolean(value)?,
            "perturb" => self.perturb = boolean(value)?,
            other => bail!("unknown key {other:?}"),
        }
        let source_key = if key == "mode" { "modes" } else { key };
        if let Some(k) = SOURCE_KEYS.iter().find(|k| **k == source_key) {
            self.sources.insert(k, SOURCE_CONFIG_FILE);
        }
        Ok(())
    }

    fn apply_flags(&mut self, common: &CommonArgs) -> Result<()> {
        if let Some(dir) = &common.dataset {
            self.dataset = Some(dir.display().to_string());
            self.sources.insert("dataset", SOURCE_FLAG);
        }
        if let Some(spec) = &common.synth {
            self.synth = Some(spec.parse()?);
            self.sources.insert("synth", SOURCE_FLAG);
        }
        if common.normalize_features {
            self.normalize_features = true;
            self.sources.insert("normalize_features", SOURCE_FLAG);
        }
        if let Some(seeds) = &common.seeds {
            self.seeds = seeds.clone();
            self.sources.insert("seeds", SOURCE_FLAG);
        }

        macro_rules! overlay {
            ($field:ident) => {
                if let Some(v) = common.$field {
                    self.$field = v;
                    self.sources.insert(stringify!($field), SOURCE_FLAG);
                }
            };
        }
        overlay!(alpha);
        overlay!(lambda);
        overlay!(w_min);
        overlay!(w_max);
        overlay!(mu1);
        overlay!(mu2);
        overlay!(lambda1);
        overlay!(lambda2);
        overlay!(n_add);
        overlay!(n_rmv);
        overlay!(mask_rate);
        overlay!(decay_hops);
        overlay!(decay_ratio);
        overlay!(n_roots);
        overlay!(walk_len);
        overlay!(epsilon);

        if let Some(t) = common.sharpen_t {
            self.sharpen_t = t;
            self.walk_sharpen_t = t;
            self.sources.insert("sharpen_t", SOURCE_FLAG);
            self.sources.insert("walk_sharpen_t", SOURCE_FLAG);
        }
        if let Some(s) = common.sigma {
            self.sigma = Some(s);
            self.sources.insert("sigma", SOURCE_FLAG);
        }
        Ok(())
    }

    fn apply_extra(&mut self, extra: &Extra<'_>) -> Result<()> {
        if let Some(mode) = extra.mode {
            Mode::from_str(mode)?;
            self.modes = vec![mode.to_string()];
            self.sources.insert("modes", SOURCE_FLAG);
        }
        macro_rules! switch {
            ($field:ident) => {
                if extra.$field {
                    self.$field = true;
                    self.sources.insert(stringify!($field), SOURCE_FLAG);
                }
            };
        }
        switch!(dump_lp);
        switch!(pairs);
        switch!(saint);
        switch!(perturb);
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.modes.is_empty() {
            bail!("at least one mode is required");
        }
        for mode in &self.modes {
            Mode::from_str(mode)?;
        }
        if self.grid_dim == 0 || self.tig_bins == 0 || self.ratio_bins == 0 {
            bail!("grid_dim, tig_bins, and ratio_bins must be positive");
        }
        self.artifact_params().validate()?;
        Ok(())
    }

    /// Loads the input graph for one seed. A dataset directory yields the
    /// same graph for every seed; a synthetic spec regenerates per seed.
    pub fn load_graph(&self, seed: u64) -> Result<Graph> {
        let graph = match (&self.dataset, &self.synth) {
            (Some(_), Some(_)) => bail!("--dataset and --synth are mutually exclusive"),
            (None, None) => bail!("one of --dataset or --synth is required"),
            (Some(dir), None) => graph::load_dir(Path::new(dir))
                .with_context(|| format!("loading dataset {dir}"))?,
            (None, Some(spec)) => graph::synth_sbm(&spec.to_params(), seed)
                .context("generating synthetic graph")?,
        };
        Ok(if self.normalize_features {
            graph.with_row_normalized_features()
        } else {
            graph
        })
    }

    pub fn parsed_modes(&self) -> Vec<Mode> {
        // Validated in resolve, so the parse cannot fail here.
        self.modes
            .iter()
            .map(|m| Mode::from_str(m).expect("modes were validated at resolve time"))
            .collect()
    }

    pub fn lp_config(&self) -> LpConfig {
        LpConfig {
            alpha: self.alpha,
            max_iter: self.lp_max_iter,
            tol: self.lp_tol,
        }
    }

    pub fn artifact_params(&self) -> ArtifactParams {
        ArtifactParams {
            lp: self.lp_config(),
            lambda: self.lambda,
            w_min: self.w_min,
            w_max: self.w_max,
            distance: DistanceConfig {
                lambda1: self.lambda1,
                lambda2: self.lambda2,
                hop_cap: self.hop_cap,
                pool_size: self.pool_size,
            },
            indices: None,
        }
    }

    pub fn perturb_config(&self, edge_count: usize, seed: u64) -> PerturbConfig {
        let mut pc = PerturbConfig::for_edge_count(edge_count, seed);
        pc.sharpen_t = self.sharpen_t;
        if let Some(sigma) = self.sigma {
            pc.sigma = sigma;
        }
        pc.n_add = self.n_add;
        pc.n_rmv = self.n_rmv;
        pc.mask_rate = self.mask_rate;
        pc.decay_hops = self.decay_hops;
        pc.decay_ratio = self.decay_ratio;
        pc
    }

    pub fn train_config(&self, mode: Mode, seed: u64) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            dropout: self.dropout,
            weight_decay: self.weight_decay,
            max_epochs: self.max_epochs,
            min_epochs: self.min_epochs,
            patience: self.patience,
            lr_decay: self.lr_decay,
            lr_decay_after: self.lr_decay_after,
            mu1: self.mu1,
            mu2: self.mu2,
            hidden: self.hidden,
            mode,
            seed,
            recompute_artifacts: self.recompute_artifacts,
        }
    }

    pub fn sampler_config(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            n_roots: self.n_roots,
            walk_len: self.walk_len,
            sharpen_t: self.walk_sharpen_t,
            epsilon: self.epsilon,
            seed,
        }
    }

    /// A copy for echoing whose perturbation budget is filled in with the
    /// value resolved against the first loaded graph.
    pub fn echo_with_sigma(&self, sigma: f64) -> RunConfig {
        let mut rc = self.clone();
        rc.sigma = Some(sigma);
        rc
    }
}

/// Keys tracked in the `sources` map; file and flag overlays mark these.
const SOURCE_KEYS: &[&str] = &[
    "dataset",
    "synth",
    "normalize_features",
    "seeds",
    "modes",
    "alpha",
    "lp_max_iter",
    "lp_tol",
    "lambda",
    "w_min",
    "w_max",
    "lambda1",
    "lambda2",
    "hop_cap",
    "pool_size",
    "mu1",
    "mu2",
    "lr",
    "dropout",
    "weight_decay",
    "max_epochs",
    "min_epochs",
    "patience",
    "lr_decay",
    "lr_decay_after",
    "hidden",
    "recompute_artifacts",
    "sharpen_t",
    "sigma",
    "n_add",
    "n_rmv",
    "mask_rate",
    "decay_hops",
    "decay_ratio",
    "n_roots",
    "walk_len",
    "walk_sharpen_t",
    "epsilon",
    "grid_dim",
    "tig_bins",
    "ratio_bins",
    "dump_lp",
    "pairs",
    "saint",
    "perturb",
];
