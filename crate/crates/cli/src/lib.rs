//! Command line front end over the tifa-gcl core crate.
//!
//! Four subcommands cover the pipeline end to end: `synth` writes
//! datasets, `analyze` scores a graph and reports where a reference model
//! fails, `train` compares training modes across seeds, and `sample`
//! dumps walk subgraphs and perturbed views. Every output directory gets
//! a `config.json` echoing the fully resolved configuration, and failures
//! leave an `error.json` record behind alongside a nonzero exit code.

pub mod args;
mod commands;
pub mod config;
mod output;

use std::path::Path;

use anyhow::Result;

use tifa_gcl::exec::ExecMode;

use args::{Cli, Command};

/// Execution mode for every core call; degrades to sequential when the
/// core crate is built without its parallel feature.
pub(crate) const EXEC: ExecMode = ExecMode::Parallel;

/// Runs one parsed invocation to completion.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze::run(a),
        Command::Train(a) => commands::train::run(a),
        Command::Sample(a) => commands::sample::run(a),
        Command::Synth(a) => commands::synth::run(a),
    }
}

/// Best-effort structured failure record next to the other outputs.
pub fn write_error_record(dir: &Path, err: &anyhow::Error) {
    let record = serde_json::json!({
        "error": format!("{err:#}"),
        "chain": err.chain().map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    let Ok(mut body) = serde_json::to_string_pretty(&record) else {
        return;
    };
    body.push('\n');
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("error.json"), body);
    }
}
