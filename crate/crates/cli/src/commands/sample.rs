//! The sample subcommand.
//!
//! `--saint` draws one walk-sampled subgraph per seed and appends a JSON
//! record for each to saint.jsonl. `--perturb` writes one perturbed view
//! per seed: the toggled edge lists, the touched nodes, and a small
//! summary of the stopping state.

use anyhow::{bail, Context, Result};
use serde_json::json;

use tifa_gcl::gnn::Mode;
use tifa_gcl::label_prop;
use tifa_gcl::perturb;
use tifa_gcl::pipeline;
use tifa_gcl::sampler;

use crate::args::SampleArgs;
use crate::config::{Extra, RunConfig};
use crate::output;
use crate::EXEC;

pub fn run(args: &SampleArgs) -> Result<()> {
    let extra = Extra {
        mode: args.mode.as_deref(),
        saint: args.saint,
        perturb: args.perturb,
        ..Extra::default()
    };
    let rc = RunConfig::resolve("sample", &args.common, extra)?;
    if !(rc.saint || rc.perturb) {
        bail!("sample requires at least one of --saint or --perturb");
    }

    let out = &args.common.out;
    output::ensure_dir(out)?;
    let first = rc.load_graph(rc.seeds[0])?;
    let first_pc = rc.perturb_config(first.edge_count(), rc.seeds[0]);
    output::write_json(out, "config.json", &rc.echo_with_sigma(first_pc.sigma))?;
    drop(first);

    if rc.saint {
        let mut lines = String::new();
        for &seed in &rc.seeds {
            let graph = rc.load_graph(seed)?;
            let lp = label_prop::run(&graph, &rc.lp_config(), EXEC).context("propagation")?;
            let probs = sampler::transition_probs_from_scores(
                graph.csr(),
                &lp.z_star,
                rc.walk_sharpen_t,
                rc.epsilon,
            )?;
            let sc = rc.sampler_config(seed);
            let sub = sampler::sample_subgraph(&graph, &probs, &sc, EXEC)
                .with_context(|| format!("sampling with seed {seed}"))?;
            let record = json!({
                "seed": seed,
                "num_nodes": sub.graph.n(),
                "num_edges": sub.graph.edge_count(),
                "roots": sub.roots,
                "nodes": sub.nodes,
            });
            lines.push_str(&serde_json::to_string(&record)?);
            lines.push('\n');
        }
        output::write_string(out, "saint.jsonl", &lines)?;
        println!("sample: wrote {} subgraph records to saint.jsonl", rc.seeds.len());
    }

    if rc.perturb {
        let mode = rc.parsed_modes()[0];
        for &seed in &rc.seeds {
            let graph = rc.load_graph(seed)?;
            let pc = rc.perturb_config(graph.edge_count(), seed);
            let (_lp, analysis) =
                pipeline::compute_analysis(&graph, &rc.artifact_params(), Some(pc), seed, EXEC)
                    .with_context(|| format!("analysis for seed {seed}"))?;
            let weights: Vec<f64> = match mode {
                Mode::TifaGcl => analysis.profile.weights.clone(),
                Mode::UniformGcl => vec![analysis.uniform_weight(); graph.n()],
                Mode::Baseline => {
                    bail!("--perturb needs a contrastive mode (uniform-gcl or tifa-gcl)")
                }
            };
            let view = perturb::perturb(&graph, &weights, &analysis.perturb)
                .with_context(|| format!("perturbing with seed {seed}"))?;

            let dir = out.join(format!("seed-{seed}"));
            output::ensure_dir(&dir)?;
            output::write_string(&dir, "added.tsv", &output::edge_tsv(&view.added))?;
            output::write_string(&dir, "removed.tsv", &output::edge_tsv(&view.removed))?;
            let mut touched = String::new();
            for node in &view.touched {
                touched.push_str(&node.to_string());
                touched.push('\n');
            }
            output::write_string(&dir, "touched.tsv", &touched)?;
            output::write_json(
                &dir,
                "perturb.json",
                &json!({
                    "seed": seed,
                    "sigma": analysis.perturb.sigma,
                    "gap": view.gap,
                    "exhausted": view.exhausted,
                    "added": view.added.len(),
                    "removed": view.removed.len(),
                    "touched": view.touched.len(),
                }),
            )?;
        }
        println!("sample: wrote {} perturbed views", rc.seeds.len());
    }
    Ok(())
}
