//! Deterministic file writers.
//!
//! Nothing here embeds timestamps, hostnames, or map iteration order, so
//! rerunning a command with the same configuration reproduces every output
//! file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use tifa_gcl::linalg::DenseMatrix;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))
}

pub fn write_string(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut body =
        serde_json::to_string_pretty(value).with_context(|| format!("serializing {name}"))?;
    body.push('\n');
    write_string(dir, name, &body)
}

/// Tab-separated rows using the shortest round-trip float formatting, the
/// same convention the dataset files use.
pub fn matrix_tsv(matrix: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..matrix.rows() {
        let mut first = true;
        for v in matrix.row(i) {
            if !first {
                out.push('\t');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// One `u\tv` line per undirected edge.
pub fn edge_tsv(edges: &[(usize, usize)]) -> String {
    let mut out = String::new();
    for (u, v) in edges {
        let _ = writeln!(out, "{u}\t{v}");
    }
    out
}
