//! The synth subcommand: generate a block-model dataset and save it in
//! the on-disk layout the other subcommands load.

use anyhow::{bail, Result};

use tifa_gcl::graph;
use tifa_gcl::perturb::PerturbConfig;

use crate::args::SynthArgs;
use crate::config::{Extra, RunConfig};
use crate::output;

pub fn run(args: &SynthArgs) -> Result<()> {
    let rc = RunConfig::resolve("synth", &args.common, Extra::default())?;
    if rc.dataset.is_some() {
        bail!("synth generates a new dataset; --dataset does not apply");
    }
    if rc.synth.is_none() {
        bail!("synth requires --synth k,per_class,p_in,p_out,noise,labels_per_class");
    }

    let seed = rc.seeds[0];
    let graph = rc.load_graph(seed)?;
    let out = &args.common.out;
    graph::save_dir(&graph, out)?;
    let sigma = PerturbConfig::for_edge_count(graph.edge_count(), seed).sigma;
    output::write_json(out, "config.json", &rc.echo_with_sigma(sigma))?;
    println!(
        "synth: wrote {} nodes, {} edges, {} classes to {}",
        graph.n(),
        graph.edge_count(),
        graph.num_classes(),
        out.display()
    );
    Ok(())
}
