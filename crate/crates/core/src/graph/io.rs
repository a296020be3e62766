//! On-disk dataset layout.
//!
//! A dataset directory holds five files:
//!
//! * `meta.json` with `{"n": …, "h": …, "k": …}`
//! * `edges.tsv`, one `src\tdst` pair per line
//! * `features.tsv`, `n` rows of `h` tab-separated floats
//! * `labels.tsv`, `node\tlabel` lines; nodes absent from the file are
//!   unlabeled
//! * `split.json` with `{"train": […], "val": […], "test": […]}`
//!
//! Floats are written with Rust's shortest round-trip `Display` formatting,
//! so save → load reproduces the feature matrix bit for bit.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Csr, Graph};
use crate::linalg::DenseMatrix;

#[derive(Serialize, Deserialize)]
struct Meta {
    n: usize,
    h: usize,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct Split {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Loads a dataset directory written by [`save_dir`].
pub fn load_dir(dir: &Path) -> Result<Graph> {
    let meta_path = dir.join("meta.json");
    let meta: Meta = serde_json::from_str(&read_to_string(&meta_path)?)
        .map_err(|e| parse_err(&meta_path, e.line(), e.to_string()))?;

    let edges_path = dir.join("edges.tsv");
    let mut edges = Vec::new();
    for (idx, line) in read_to_string(&edges_path)?.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let parse = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| parse_err(&edges_path, idx + 1, "expected src\\tdst"))?
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(&edges_path, idx + 1, e.to_string()))
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        edges.push((u, v));
    }

    let feat_path = dir.join("features.tsv");
    let feat_text = read_to_string(&feat_path)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(meta.n);
    for (idx, line) in feat_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split('\t')
            .map(|s| s.trim().parse::<f64>().map_err(|e| parse_err(&feat_path, idx + 1, e.to_string())))
            .collect::<Result<_>>()?;
        if row.len() != meta.h {
            return Err(parse_err(
                &feat_path,
                idx + 1,
                format!("expected {} feature columns, found {}", meta.h, row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != meta.n {
        return Err(Error::Data(format!(
            "features.tsv has {} rows but meta.json declares n={}",
            rows.len(),
            meta.n
        )));
    }
    let features = DenseMatrix::from_rows(&rows);

    let labels_path = dir.join("labels.tsv");
    let mut labels: Vec<Option<usize>> = vec![None; meta.n];
    for (idx, line) in read_to_string(&labels_path)?.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let parse = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| parse_err(&labels_path, idx + 1, "expected node\\tlabel"))?
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(&labels_path, idx + 1, e.to_string()))
        };
        let node = parse(parts.next())?;
        let label = parse(parts.next())?;
        if node >= meta.n {
            return Err(parse_err(&labels_path, idx + 1, format!("node {node} out of range, n={}", meta.n)));
        }
        labels[node] = Some(label);
    }

    let split_path = dir.join("split.json");
    let split: Split = serde_json::from_str(&read_to_string(&split_path)?)
        .map_err(|e| parse_err(&split_path, e.line(), e.to_string()))?;
    let mut train_mask = vec![false; meta.n];
    let mut val_mask = vec![false; meta.n];
    let mut test_mask = vec![false; meta.n];
    for (ids, mask, name) in [
        (&split.train, &mut train_mask, "train"),
        (&split.val, &mut val_mask, "val"),
        (&split.test, &mut test_mask, "test"),
    ] {
        for &i in ids.iter() {
            if i >= meta.n {
                return Err(Error::Data(format!("{name} split lists node {i} but n={}", meta.n)));
            }
            mask[i] = true;
        }
    }

    let csr = Csr::from_undirected_edges(meta.n, &edges)?;
    Graph::new(csr, features, labels, meta.k, train_mask, val_mask, test_mask)
}

/// Writes `graph` into `dir` (created if missing) in the layout that
/// [`load_dir`] reads. Edge order is canonical (u < v ascending), so the
/// round trip is lossless up to input edge order.
pub fn save_dir(graph: &Graph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let write = |name: &str, content: &str| -> Result<()> {
        let path = dir.join(name);
        let mut f = fs::File::create(&path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        f.write_all(content.as_bytes())
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })
    };

    let meta = Meta { n: graph.n(), h: graph.num_features(), k: graph.num_classes() };
    write("meta.json", &format!("{}\n", serde_json::to_string_pretty(&meta).expect("meta serializes")))?;

    let mut edges = String::new();
    for (u, v) in graph.csr().edges() {
        edges.push_str(&format!("{u}\t{v}\n"));
    }
    write("edges.tsv", &edges)?;

    let mut feats = String::new();
    for i in 0..graph.n() {
        let row = graph.features().row(i);
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                feats.push('\t');
            }
            feats.push_str(&v.to_string());
        }
        feats.push('\n');
    }
    write("features.tsv", &feats)?;

    let mut labels = String::new();
    for (i, lab) in graph.labels().iter().enumerate() {
        if let Some(l) = lab {
            labels.push_str(&format!("{i}\t{l}\n"));
        }
    }
    write("labels.tsv", &labels)?;

    let collect = |mask: &[bool]| -> Vec<usize> {
        mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
    };
    let split = Split {
        train: collect(graph.train_mask()),
        val: collect(graph.val_mask()),
        test: collect(graph.test_mask()),
    };
    write("split.json", &format!("{}\n", serde_json::to_string_pretty(&split).expect("split serializes")))
}
