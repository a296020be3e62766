//! The train subcommand.
//!
//! Trains one model per (mode, seed) pair. Runs sharing a seed also share
//! the graph and the precomputed artifacts, so modes are compared on
//! identical inputs. Each run gets its own directory with the epoch log
//! and a final report; per-mode aggregates land in summary.json.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde_json::json;

use tifa_gcl::gnn;
use tifa_gcl::graph::Graph;
use tifa_gcl::pipeline::{self, Analysis};
use tifa_gcl::tig;

use crate::args::TrainArgs;
use crate::config::{Extra, RunConfig};
use crate::output;
use crate::EXEC;

pub fn run(args: &TrainArgs) -> Result<()> {
    let extra = Extra { mode: args.mode.as_deref(), ..Extra::default() };
    let rc = RunConfig::resolve("train", &args.common, extra)?;
    let modes = rc.parsed_modes();
    let out = &args.common.out;
    output::ensure_dir(out)?;

    // One graph and one artifact set per distinct seed, shared by every
    // mode; repeated seeds reuse the cache so identical runs stay identical.
    let mut inputs: BTreeMap<u64, (Graph, Analysis)> = BTreeMap::new();
    for &seed in &rc.seeds {
        if inputs.contains_key(&seed) {
            continue;
        }
        let graph = rc.load_graph(seed)?;
        let pc = rc.perturb_config(graph.edge_count(), seed);
        let (_lp, analysis) =
            pipeline::compute_analysis(&graph, &rc.artifact_params(), Some(pc), seed, EXEC)
                .with_context(|| format!("analysis for seed {seed}"))?;
        inputs.insert(seed, (graph, analysis));
    }

    let first_sigma = inputs[&rc.seeds[0]].1.perturb.sigma;
    output::write_json(out, "config.json", &rc.echo_with_sigma(first_sigma))?;

    let mut summary = Vec::new();
    for &mode in &modes {
        let mut accs = Vec::new();
        let mut best_epochs = Vec::new();
        for &seed in &rc.seeds {
            let (graph, analysis) = &inputs[&seed];
            let tc = rc.train_config(mode, seed);
            let (model, log) = gnn::train(graph, analysis, &tc, EXEC)
                .with_context(|| format!("training {mode} with seed {seed}"))?;
            let (test_acc, preds) = gnn::evaluate(&model, graph, graph.test_mask(), EXEC)?;

            let test_labels: Vec<Option<usize>> = (0..graph.n())
                .map(|i| if graph.test_mask()[i] { graph.label(i) } else { None })
                .collect();
            let bins =
                tig::tig_bin_accuracy(&analysis.profile.tig, &preds, &test_labels, rc.tig_bins)?;
            let per_bin: Vec<_> = bins
                .iter()
                .enumerate()
                .map(|(b, bin)| {
                    json!({
                        "bin": b,
                        "count": bin.count,
                        "correct": bin.correct,
                        "accuracy": bin.accuracy,
                    })
                })
                .collect();

            let run_dir = out.join(mode.to_string()).join(format!("seed-{seed}"));
            output::ensure_dir(&run_dir)?;
            let mut jsonl = Vec::new();
            log.write_jsonl(&mut jsonl)?;
            output::write_string(&run_dir, "metrics.jsonl", std::str::from_utf8(&jsonl)?)?;
            let report = json!({
                "mode": mode.to_string(),
                "seed": seed,
                "best_epoch": log.best_epoch,
                "val_acc": log.best_val_acc,
                "test_acc": test_acc,
                "per_bin_acc": per_bin,
                "config": rc.echo_with_sigma(analysis.perturb.sigma),
            });
            output::write_json(&run_dir, "report.json", &report)?;

            accs.push(test_acc);
            best_epochs.push(log.best_epoch as f64);
        }

        let acc_mean = mean(&accs);
        let acc_std = population_std(&accs, acc_mean);
        summary.push(json!({
            "mode": mode.to_string(),
            "seeds": rc.seeds,
            "mean_test_acc": acc_mean,
            "std_test_acc": acc_std,
            "mean_best_epoch": mean(&best_epochs),
        }));
        println!(
            "train {mode}: mean test accuracy {acc_mean:.4} (std {acc_std:.4}) over {} runs",
            accs.len()
        );
    }
    output::write_json(out, "summary.json", &summary)?;
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64], mean: f64) -> f64 {
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_population_std_match_hand_values() {
        let values = [0.5, 0.7];
        let m = mean(&values);
        assert!((m - 0.6).abs() < 1e-12);
        assert!((population_std(&values, m) - 0.1).abs() < 1e-12);
        let same = [0.42, 0.42, 0.42];
        assert_eq!(population_std(&same, mean(&same)), 0.0);
    }
}
