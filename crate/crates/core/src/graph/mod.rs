//! Graph storage: immutable symmetric CSR with features, labels, and
//! train/val/test masks.
//!
//! Construction symmetrizes the edge list, deduplicates, and drops
//! self-loops. Neighbor lists are sorted ascending, and every algorithm in
//! the crate iterates them in that order, which is what makes seeded runs
//! reproducible. Isolated nodes are retained.

mod io;
mod synth;

pub use io::{load_dir, save_dir};
pub use synth::{synth_sbm, SbmParams};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::linalg::DenseMatrix;

/// Compressed sparse rows over node ids; rows are sorted, symmetric, and
/// free of self-loops and duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csr {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Csr {
    /// Builds from an undirected edge list. Direction, duplicates, and
    /// self-loops in the input are normalized away.
    pub fn from_undirected_edges(n: usize, edges: &[(usize, usize)]) -> Result<Csr> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Data(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            col_idx.extend_from_slice(list);
            row_ptr.push(col_idx.len());
        }
        Ok(Csr { row_ptr, col_idx })
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.col_idx.len() / 2
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Iterates undirected edges as (u, v) with u < v, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    /// Hop counts from `source`, capped: anything unreachable or beyond
    /// `max_hop` gets the sentinel value `max_hop + 1`.
    pub fn bfs_hops(&self, source: usize, max_hop: usize) -> Result<Vec<usize>> {
        let n = self.n();
        if source >= n {
            return Err(Error::InvalidParameter(format!(
                "bfs source {source} out of range for {n} nodes"
            )));
        }
        let unreachable = max_hop + 1;
        let mut hops = vec![unreachable; n];
        hops[source] = 0;
        let mut frontier = vec![source];
        let mut depth = 0;
        while !frontier.is_empty() && depth < max_hop {
            depth += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in self.neighbors(u) {
                    if hops[v] == unreachable {
                        hops[v] = depth;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        Ok(hops)
    }
}

/// Adjacency normalization variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `A D⁻¹`: each column of a degree ≥ 1 node sums to 1.
    Column,
    /// `D̃^{-1/2} (A+I) D̃^{-1/2}` with self-loops added.
    Symmetric,
}

/// Sparse normalized adjacency in CSR form with per-entry weights.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    kind: NormKind,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn from_csr(csr: &Csr, kind: NormKind) -> NormalizedAdjacency {
        let n = csr.n();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        match kind {
            NormKind::Column => {
                for i in 0..n {
                    for &j in csr.neighbors(i) {
                        col_idx.push(j);
                        values.push(1.0 / csr.degree(j) as f64);
                    }
                    row_ptr.push(col_idx.len());
                }
            }
            NormKind::Symmetric => {
                // Self-loop inserted in sorted column position.
                for i in 0..n {
                    let di = (csr.degree(i) + 1) as f64;
                    let mut placed = false;
                    for &j in csr.neighbors(i) {
                        if !placed && j > i {
                            col_idx.push(i);
                            values.push(1.0 / di);
                            placed = true;
                        }
                        let dj = (csr.degree(j) + 1) as f64;
                        col_idx.push(j);
                        values.push(1.0 / (di * dj).sqrt());
                    }
                    if !placed {
                        col_idx.push(i);
                        values.push(1.0 / di);
                    }
                    row_ptr.push(col_idx.len());
                }
            }
        }
        NormalizedAdjacency { kind, row_ptr, col_idx, values }
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Sparse × dense product, row-parallel with a fixed per-row
    /// accumulation order.
    pub fn matmul(&self, m: &DenseMatrix, mode: ExecMode) -> DenseMatrix {
        assert_eq!(self.n(), m.rows(), "adjacency and matrix row counts disagree");
        let cols = m.cols();
        let mut out = DenseMatrix::zeros(self.n(), cols);
        exec::fill_rows(mode, out.data_mut(), cols, |i, chunk| {
            let (cols_i, vals_i) = self.row(i);
            for (&j, &w) in cols_i.iter().zip(vals_i.iter()) {
                let src = m.row(j);
                for (c, v) in chunk.iter_mut().enumerate() {
                    *v += w * src[c];
                }
            }
        });
        out
    }
}

/// Immutable attributed graph.
#[derive(Clone, Debug)]
pub struct Graph {
    csr: Csr,
    features: DenseMatrix,
    labels: Vec<Option<usize>>,
    num_classes: usize,
    train_mask: Vec<bool>,
    val_mask: Vec<bool>,
    test_mask: Vec<bool>,
}

impl Graph {
    pub fn new(
        csr: Csr,
        features: DenseMatrix,
        labels: Vec<Option<usize>>,
        num_classes: usize,
        train_mask: Vec<bool>,
        val_mask: Vec<bool>,
        test_mask: Vec<bool>,
    ) -> Result<Graph> {
        let n = csr.n();
        if features.rows() != n {
            return Err(Error::Data(format!(
                "feature matrix has {} rows for {n} nodes",
                features.rows()
            )));
        }
        if labels.len() != n {
            return Err(Error::Data(format!("label vector has {} entries for {n} nodes", labels.len())));
        }
        for (mask, name) in [(&train_mask, "train"), (&val_mask, "val"), (&test_mask, "test")] {
            if mask.len() != n {
                return Err(Error::Data(format!("{name} mask has {} entries for {n} nodes", mask.len())));
            }
        }
        for (node, lab) in labels.iter().enumerate() {
            if let Some(l) = lab {
                if *l >= num_classes {
                    return Err(Error::Data(format!(
                        "label out of range: node {node} has label {l} but k={num_classes}"
                    )));
                }
            }
        }
        for i in 0..n {
            let overlap = (train_mask[i] && val_mask[i])
                || (train_mask[i] && test_mask[i])
                || (val_mask[i] && test_mask[i]);
            if overlap {
                return Err(Error::Data(format!("masks overlap at node {i}")));
            }
            if train_mask[i] && labels[i].is_none() {
                return Err(Error::Data(format!("train mask selects unlabeled node {i}")));
            }
        }
        Ok(Graph { csr, features, labels, num_classes, train_mask, val_mask, test_mask })
    }

    pub fn n(&self) -> usize {
        self.csr.n()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn csr(&self) -> &Csr {
        &self.csr
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn train_mask(&self) -> &[bool] {
        &self.train_mask
    }

    pub fn val_mask(&self) -> &[bool] {
        &self.val_mask
    }

    pub fn test_mask(&self) -> &[bool] {
        &self.test_mask
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.csr.neighbors(i)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.csr.degree(i)
    }

    pub fn edge_count(&self) -> usize {
        self.csr.edge_count()
    }

    pub fn bfs_hops(&self, source: usize, max_hop: usize) -> Result<Vec<usize>> {
        self.csr.bfs_hops(source, max_hop)
    }

    pub fn normalized(&self, kind: NormKind) -> NormalizedAdjacency {
        NormalizedAdjacency::from_csr(&self.csr, kind)
    }

    /// Returns a copy whose feature rows are L1-normalized (rows summing to
    /// 0 are left untouched).
    pub fn with_row_normalized_features(mut self) -> Graph {
        for i in 0..self.n() {
            let row = self.features.row_mut(i);
            let s: f64 = row.iter().map(|v| v.abs()).sum();
            if s > 0.0 {
                for v in row.iter_mut() {
                    *v /= s;
                }
            }
        }
        self
    }

    /// Subgraph induced by `nodes`: keeps exactly the edges with both
    /// endpoints inside, restricts features/labels/masks, and returns the
    /// new→old id map (new ids follow ascending old-id order).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("induced subgraph of an empty node set".into()));
        }
        let mut old_ids: Vec<usize> = nodes.to_vec();
        old_ids.sort_unstable();
        old_ids.dedup();
        if let Some(&bad) = old_ids.iter().find(|&&v| v >= self.n()) {
            return Err(Error::InvalidParameter(format!(
                "subgraph node {bad} out of range for {} nodes",
                self.n()
            )));
        }
        let mut new_of_old = vec![usize::MAX; self.n()];
        for (new, &old) in old_ids.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut edges = Vec::new();
        for (new_u, &old_u) in old_ids.iter().enumerate() {
            for &old_v in self.csr.neighbors(old_u) {
                let new_v = new_of_old[old_v];
                if new_v != usize::MAX && new_u < new_v {
                    edges.push((new_u, new_v));
                }
            }
        }
        let csr = Csr::from_undirected_edges(old_ids.len(), &edges)?;
        let mut feat = DenseMatrix::zeros(old_ids.len(), self.num_features());
        for (new, &old) in old_ids.iter().enumerate() {
            feat.row_mut(new).copy_from_slice(self.features.row(old));
        }
        let labels = old_ids.iter().map(|&o| self.labels[o]).collect();
        let train = old_ids.iter().map(|&o| self.train_mask[o]).collect();
        let val = old_ids.iter().map(|&o| self.val_mask[o]).collect();
        let test = old_ids.iter().map(|&o| self.test_mask[o]).collect();
        let g = Graph::new(csr, feat, labels, self.num_classes, train, val, test)?;
        Ok((g, old_ids))
    }
}

/// Test/bench helper: a labeled graph from raw parts with every node in the
/// test mask except explicit train/val ids.
pub fn build_graph(
    n: usize,
    edges: &[(usize, usize)],
    features: DenseMatrix,
    labels: Vec<Option<usize>>,
    num_classes: usize,
    train: &[usize],
    val: &[usize],
) -> Result<Graph> {
    let csr = Csr::from_undirected_edges(n, edges)?;
    let mut train_mask = vec![false; n];
    let mut val_mask = vec![false; n];
    let mut test_mask = vec![true; n];
    for &i in train {
        train_mask[i] = true;
        test_mask[i] = false;
    }
    for &i in val {
        val_mask[i] = true;
        test_mask[i] = false;
    }
    Graph::new(csr, features, labels, num_classes, train_mask, val_mask, test_mask)
}
