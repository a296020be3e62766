//! The analyze subcommand.
//!
//! Computes propagation scores and the TIG profile on one graph, trains a
//! reference model, and writes the score tables, the error grid, the
//! per-bin accuracies, and the intra-class distance curve. Runs on the
//! first seed of the seed list.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use serde_json::json;

use tifa_gcl::distance::{intra_class_ratio_bins, PairScope};
use tifa_gcl::gnn;
use tifa_gcl::pipeline;
use tifa_gcl::tig;

use crate::args::AnalyzeArgs;
use crate::config::{Extra, RunConfig};
use crate::output;
use crate::EXEC;

pub fn run(args: &AnalyzeArgs) -> Result<()> {
    let extra = Extra {
        mode: args.mode.as_deref(),
        dump_lp: args.dump_lp,
        pairs: args.pairs,
        ..Extra::default()
    };
    let rc = RunConfig::resolve("analyze", &args.common, extra)?;
    let seed = rc.seeds[0];
    let graph = rc.load_graph(seed)?;
    let n = graph.n();

    let params = rc.artifact_params();
    let pc = rc.perturb_config(graph.edge_count(), seed);
    let (lp, analysis) =
        pipeline::compute_analysis(&graph, &params, Some(pc), seed, EXEC).context("analysis")?;
    let profile = &analysis.profile;

    let out = &args.common.out;
    output::ensure_dir(out)?;
    output::write_json(out, "config.json", &rc.echo_with_sigma(analysis.perturb.sigma))?;

    let mut tsv = String::from("node\tintensity\tclarity\ttig\trank\tweight\n");
    for i in 0..n {
        let _ = writeln!(
            tsv,
            "{i}\t{}\t{}\t{}\t{}\t{}",
            profile.intensity[i], profile.clarity[i], profile.tig[i], profile.rank[i],
            profile.weights[i]
        );
    }
    output::write_string(out, "tig.tsv", &tsv)?;

    if rc.dump_lp {
        output::write_string(out, "z.tsv", &output::matrix_tsv(&lp.z))?;
        output::write_string(out, "z_star.tsv", &output::matrix_tsv(&lp.z_star))?;
    }

    if rc.pairs {
        let ix = analysis.pairs.indices;
        let per_node: Vec<_> = (0..n)
            .map(|i| {
                json!({
                    "node": i,
                    "positives": analysis.pairs.positives[i],
                    "negatives": analysis.pairs.negatives[i],
                })
            })
            .collect();
        let doc = json!({
            "indices": {
                "post_end": ix.post_end,
                "negt_beg": ix.negt_beg,
                "negt_end": ix.negt_end,
            },
            "pairs": per_node,
        });
        output::write_json(out, "pairs.json", &doc)?;
    }

    // A reference model supplies the predictions behind the error grid and
    // the per-bin accuracies. Scored on labeled nodes outside the train
    // split, so memorized training nodes cannot flatter the picture.
    let mode = rc.parsed_modes()[0];
    let tc = rc.train_config(mode, seed);
    let (model, _log) = gnn::train(&graph, &analysis, &tc, EXEC).context("reference training")?;
    let eval_mask: Vec<bool> =
        (0..n).map(|i| !graph.train_mask()[i] && graph.label(i).is_some()).collect();
    let (acc, preds) = gnn::evaluate(&model, &graph, &eval_mask, EXEC)?;
    let eval_labels: Vec<Option<usize>> =
        (0..n).map(|i| if eval_mask[i] { graph.label(i) } else { None }).collect();

    let grid = tig::grid_report(&profile.intensity, &profile.clarity, &preds, &eval_labels, rc.grid_dim)?;
    let mut csv = String::from("intensity_bin,clarity_bin,count,errors,error_rate\n");
    for (ib, row) in grid.cells.iter().enumerate() {
        for (cb, cell) in row.iter().enumerate() {
            let rate = cell.error_rate.map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{ib},{cb},{},{},{rate}", cell.count, cell.errors);
        }
    }
    output::write_string(out, "grid.csv", &csv)?;

    // Bin 0 holds the highest TIG scores.
    let bins = tig::tig_bin_accuracy(&profile.tig, &preds, &eval_labels, rc.tig_bins)?;
    let mut csv = String::from("bin,count,correct,accuracy\n");
    for (b, bin) in bins.iter().enumerate() {
        let acc = bin.accuracy.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{b},{},{},{acc}", bin.count, bin.correct);
    }
    output::write_string(out, "bins.csv", &csv)?;

    let ratio =
        intra_class_ratio_bins(graph.csr(), &lp.z_star, graph.labels(), rc.ratio_bins, PairScope::All)?;
    let mut csv = String::from("bin,count,intra,ratio\n");
    for (b, bin) in ratio.iter().enumerate() {
        let r = bin.ratio.map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{b},{},{},{r}", bin.count, bin.intra);
    }
    output::write_string(out, "intra_ratio.csv", &csv)?;

    println!(
        "analyze: {n} nodes, {} edges, reference {mode} accuracy {acc:.4} on {} held-out nodes",
        graph.edge_count(),
        eval_mask.iter().filter(|m| **m).count()
    );
    Ok(())
}
