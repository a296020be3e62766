//! Flag surface of the `tifa-gcl` binary.
//!
//! Every tunable knob is optional on the command line; unset knobs fall
//! back to the config file (`--config`) and then to built-in defaults.
//! The resolved values, with the origin of each one, are echoed into
//! `config.json` in the output directory.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "tifa-gcl",
    version,
    about = "Topology-imbalance aware graph contrastive learning toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score nodes, mine contrastive pairs, and write analysis tables.
    Analyze(AnalyzeArgs),
    /// Train one model per (mode, seed) pair and aggregate the results.
    Train(TrainArgs),
    /// Dump walk-sampled subgraphs or perturbed graph views.
    Sample(SampleArgs),
    /// Generate a synthetic block-model dataset directory.
    Synth(SynthArgs),
}

impl Cli {
    /// The output directory of whichever subcommand was requested.
    pub fn out_dir(&self) -> &PathBuf {
        match &self.command {
            Command::Analyze(a) => &a.common.out,
            Command::Train(a) => &a.common.out,
            Command::Sample(a) => &a.common.out,
            Command::Synth(a) => &a.common.out,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Dataset directory holding meta.json, edges.tsv, features.tsv,
    /// labels.tsv, and split.json.
    #[arg(long, value_name = "DIR")]
    pub dataset: Option<PathBuf>,

    /// Synthetic block model: k,per_class,p_in,p_out,noise,labels_per_class.
    #[arg(long, value_name = "SPEC")]
    pub synth: Option<String>,

    /// L1-normalize feature rows after loading.
    #[arg(long)]
    pub normalize_features: bool,

    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Comma-separated seed list, e.g. 1,2,3.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,

    /// JSON config file; flags override it, it overrides built-in defaults.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Propagation restart probability.
    #[arg(long, value_name = "REAL")]
    pub alpha: Option<f64>,

    /// Clarity weight inside the TIG score.
    #[arg(long, value_name = "REAL")]
    pub lambda: Option<f64>,

    /// Lower end of the contrastive weight schedule.
    #[arg(long, value_name = "REAL")]
    pub w_min: Option<f64>,

    /// Upper end of the contrastive weight schedule.
    #[arg(long, value_name = "REAL")]
    pub w_max: Option<f64>,

    /// Negative-pair weight inside the pairwise loss.
    #[arg(long, value_name = "REAL")]
    pub mu1: Option<f64>,

    /// Pairwise-term weight inside the per-node unsupervised loss.
    #[arg(long, value_name = "REAL")]
    pub mu2: Option<f64>,

    /// Local topology distance weight in the composite distance.
    #[arg(long, value_name = "REAL")]
    pub lambda1: Option<f64>,

    /// Embedding distance weight in the composite distance.
    #[arg(long, value_name = "REAL")]
    pub lambda2: Option<f64>,

    /// Sharpening temperature for both the perturbation-target softmax and
    /// the walk-step softmax.
    #[arg(long, value_name = "REAL")]
    pub sharpen_t: Option<f64>,

    /// Perturbation budget: stop once the adjacency delta norm reaches it.
    /// Defaults to a value derived from the edge count.
    #[arg(long, value_name = "REAL")]
    pub sigma: Option<f64>,

    /// Edges added per perturbed node.
    #[arg(long, value_name = "N")]
    pub n_add: Option<usize>,

    /// Edges removed per perturbed node.
    #[arg(long, value_name = "N")]
    pub n_rmv: Option<usize>,

    /// Fraction of feature columns zeroed per perturbed node.
    #[arg(long, value_name = "REAL")]
    pub mask_rate: Option<f64>,

    /// Neighborhood radius of the selection probability damping.
    #[arg(long, value_name = "N")]
    pub decay_hops: Option<usize>,

    /// Damping multiplier applied within that radius.
    #[arg(long, value_name = "REAL")]
    pub decay_ratio: Option<f64>,

    /// Walk roots per sampled subgraph.
    #[arg(long, value_name = "N")]
    pub n_roots: Option<usize>,

    /// Steps taken from each walk root.
    #[arg(long, value_name = "N")]
    pub walk_len: Option<usize>,

    /// Floor added to edge distances before inverting them into walk
    /// probabilities.
    #[arg(long, value_name = "REAL")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Model whose predictions feed the error grids; defaults to baseline.
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,

    /// Also write the raw and converged propagation matrices.
    #[arg(long)]
    pub dump_lp: bool,

    /// Also write the positive and negative pair lists.
    #[arg(long)]
    pub pairs: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Restrict to one mode (baseline, uniform-gcl, tifa-gcl); default runs
    /// all three.
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Weight profile used when picking perturbation targets; defaults to
    /// tifa-gcl.
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,

    /// Write walk-sampled subgraphs, one JSON line per seed.
    #[arg(long)]
    pub saint: bool,

    /// Write one perturbed graph view per seed.
    #[arg(long)]
    pub perturb: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}
