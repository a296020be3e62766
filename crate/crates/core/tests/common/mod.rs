//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tifa_gcl::distance::PairSets;
use tifa_gcl::exec::ExecMode;
use tifa_gcl::gnn::{compute_step, forward, DropoutMask, GcnModel, Mode, StepInputs};
use tifa_gcl::graph::{build_graph, Graph, NormKind, NormalizedAdjacency};
use tifa_gcl::linalg::DenseMatrix;
use tifa_gcl::perturb;
use tifa_gcl::pipeline::{compute_analysis, Analysis, ArtifactParams};

/// Dense reference solve of the propagation fixed point
/// Z = alpha (I - (1-alpha) A')^{-1} Z0 with A' column-normalized,
/// by Gaussian elimination with partial pivoting. Independent of the
/// iterative solver under test.
pub fn dense_lp_oracle(
    n: usize,
    edges: &[(usize, usize)],
    z0: &[Vec<f64>],
    alpha: f64,
) -> Vec<Vec<f64>> {
    let mut adj = vec![vec![0.0f64; n]; n];
    for &(u, v) in edges {
        adj[u][v] = 1.0;
        adj[v][u] = 1.0;
    }
    let degree: Vec<f64> = (0..n).map(|j| adj.iter().map(|row| row[j]).sum()).collect();
    // System matrix M = I - (1-alpha) A D^{-1}.
    let mut m = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let a = if degree[j] > 0.0 { adj[i][j] / degree[j] } else { 0.0 };
            m[i][j] = if i == j { 1.0 } else { 0.0 } - (1.0 - alpha) * a;
        }
    }
    let k = z0[0].len();
    let mut out = vec![vec![0.0f64; k]; n];
    for c in 0..k {
        let rhs: Vec<f64> = (0..n).map(|i| alpha * z0[i][c]).collect();
        let col = solve_dense(m.clone(), rhs);
        for i in 0..n {
            out[i][c] = col[i];
        }
    }
    out
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b2| m[a][col].abs().partial_cmp(&m[b2][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 1e-12, "singular propagation system");
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[row][j] -= f * m[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for j in row + 1..n {
            s -= m[row][j] * x[j];
        }
        x[row] = s / m[row][row];
    }
    x
}

/// Seeded Gilbert random graph with fully labeled nodes and a three-way
/// split. Every node gets a uniform random class and features in [0, 1].
pub fn random_graph(n: usize, edge_prob: f64, num_features: usize, k: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((i, j));
            }
        }
    }
    let feats: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..num_features).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let mut labels: Vec<Option<usize>> = (0..n).map(|_| Some(rng.gen_range(0..k))).collect();
    // Guarantee every class has at least one training node.
    for c in 0..k {
        labels[c] = Some(c);
    }
    let train: Vec<usize> = (0..n / 3).collect();
    let val: Vec<usize> = (n / 3..2 * n / 3).collect();
    build_graph(
        n,
        &edges,
        DenseMatrix::from_rows(&feats),
        labels,
        k,
        &train,
        &val,
    )
    .unwrap()
}

/// Owns everything one gradient step reads, so borrows can be handed to
/// `StepInputs` on demand and finite differences can re-evaluate the loss
/// under the exact same randomness.
pub struct StepFixture {
    pub graph: Graph,
    pub adj_clean: NormalizedAdjacency,
    pub pert: Option<(NormalizedAdjacency, DenseMatrix)>,
    pub pairs: Option<PairSets>,
    pub weights: Option<Vec<f64>>,
    pub mask_clean: Option<DropoutMask>,
    pub mask_pert: Option<DropoutMask>,
    pub mu1: f64,
    pub mu2: f64,
}

impl StepFixture {
    pub fn inputs(&self) -> StepInputs<'_> {
        StepInputs {
            adj_clean: &self.adj_clean,
            x_clean: self.graph.features(),
            labels: self.graph.labels(),
            train_mask: self.graph.train_mask(),
            num_classes: self.graph.num_classes(),
            pert: self.pert.as_ref().map(|(a, x)| (a, x)),
            pairs: self.pairs.as_ref(),
            weights: self.weights.as_deref(),
            mu1: self.mu1,
            mu2: self.mu2,
            mask_clean: self.mask_clean.as_ref(),
            mask_pert: self.mask_pert.as_ref(),
        }
    }
}

/// Builds a fixed step (graph view, pairs, weights, dropout masks) for the
/// given mode. For the contrastive modes the perturbed view and pair sets
/// come from the real pipeline.
pub fn step_fixture(graph: Graph, mode: Mode, hidden: usize, dropout: f64, seed: u64) -> StepFixture {
    let adj_clean = graph.normalized(NormKind::Symmetric);
    let n = graph.n();
    let mut drop_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let mask_clean = if dropout > 0.0 {
        Some(DropoutMask::draw(n, hidden, dropout, &mut drop_rng))
    } else {
        None
    };
    if mode == Mode::Baseline {
        return StepFixture {
            graph,
            adj_clean,
            pert: None,
            pairs: None,
            weights: None,
            mask_clean,
            mask_pert: None,
            mu1: 0.33,
            mu2: 0.1,
        };
    }
    let mask_pert = if dropout > 0.0 {
        Some(DropoutMask::draw(n, hidden, dropout, &mut drop_rng))
    } else {
        None
    };
    let (_, analysis): (_, Analysis) =
        compute_analysis(&graph, &ArtifactParams::default(), None, seed, ExecMode::Sequential)
            .unwrap();
    let weights = match mode {
        Mode::TifaGcl => analysis.profile.weights.clone(),
        _ => vec![analysis.uniform_weight(); n],
    };
    let selection = match mode {
        Mode::TifaGcl => analysis.profile.weights.clone(),
        _ => vec![1.0; n],
    };
    let mut pert_cfg = analysis.perturb.clone();
    pert_cfg.seed = seed.wrapping_add(17);
    let pert = perturb::perturb(&graph, &selection, &pert_cfg).unwrap();
    let adj_pert = NormalizedAdjacency::from_csr(&pert.a_p, NormKind::Symmetric);
    StepFixture {
        graph,
        adj_clean,
        pert: Some((adj_pert, pert.x_p)),
        pairs: Some(analysis.pairs),
        weights: Some(weights),
        mask_clean,
        mask_pert,
        mu1: 0.33,
        mu2: 0.1,
    }
}

/// Smallest absolute first-layer pre-activation across the live branches.
/// Finite differences sit on a ReLU kink when this is tiny, so fixtures
/// below a margin are resampled rather than tested against a smooth oracle.
pub fn kink_margin(fixture: &StepFixture, model: &GcnModel) -> f64 {
    let mut margin = f64::INFINITY;
    let clean = forward(
        &fixture.adj_clean,
        fixture.graph.features(),
        &model.w0,
        &model.w1,
        fixture.mask_clean.as_ref(),
        ExecMode::Sequential,
    );
    for v in clean.pre_act.data() {
        margin = margin.min(v.abs());
    }
    if let Some((adj_p, x_p)) = &fixture.pert {
        let pert = forward(
            adj_p,
            x_p,
            &model.w0,
            &model.w1,
            fixture.mask_pert.as_ref(),
            ExecMode::Sequential,
        );
        for v in pert.pre_act.data() {
            margin = margin.min(v.abs());
        }
    }
    margin
}

pub struct GradCheckReport {
    pub checked: usize,
    /// Worst value of |analytic - numeric| / (1e-4 max(|a|,|n|) + 1e-6);
    /// at or below 1 means every entry meets the tolerance.
    pub worst_scaled: f64,
    pub worst_abs: f64,
}

/// Central-difference check of every parameter entry against the analytic
/// gradients, with step 1e-4.
pub fn gradient_check(fixture: &StepFixture, model: &GcnModel, mode: Mode) -> GradCheckReport {
    const STEP: f64 = 1e-4;
    let inputs = fixture.inputs();
    let (_, grads) = compute_step(
        &inputs,
        &model.w0,
        &model.w1,
        &model.frozen_w0,
        &model.frozen_w1,
        mode,
        ExecMode::Sequential,
    )
    .unwrap();
    let mut report = GradCheckReport {
        checked: 0,
        worst_scaled: 0.0,
        worst_abs: 0.0,
    };
    let mut check_layer = |layer: usize| {
        let base = if layer == 0 { &model.w0 } else { &model.w1 };
        let analytic = if layer == 0 { &grads.w0 } else { &grads.w1 };
        for idx in 0..base.data().len() {
            let probe = |delta: f64| -> f64 {
                let mut w0 = model.w0.clone();
                let mut w1 = model.w1.clone();
                if layer == 0 {
                    w0.data_mut()[idx] += delta;
                } else {
                    w1.data_mut()[idx] += delta;
                }
                let (parts, _) = compute_step(
                    &inputs,
                    &w0,
                    &w1,
                    &model.frozen_w0,
                    &model.frozen_w1,
                    mode,
                    ExecMode::Sequential,
                )
                .unwrap();
                parts.total
            };
            let numeric = (probe(STEP) - probe(-STEP)) / (2.0 * STEP);
            let a = analytic.data()[idx];
            let abs_err = (a - numeric).abs();
            let scaled = abs_err / (1e-4 * a.abs().max(numeric.abs()) + 1e-6);
            report.checked += 1;
            if scaled > report.worst_scaled {
                report.worst_scaled = scaled;
            }
            if abs_err > report.worst_abs {
                report.worst_abs = abs_err;
            }
        }
    };
    check_layer(0);
    check_layer(1);
    report
}

/// A model whose frozen copy deliberately differs from the live weights,
/// so stop-gradient behavior is actually exercised.
pub fn model_with_stale_frozen(
    num_features: usize,
    hidden: usize,
    k: usize,
    seed: u64,
) -> GcnModel {
    let mut model = GcnModel::init(num_features, hidden, k, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(99));
    for v in model.w0.data_mut() {
        *v += 0.05 * (rng.gen::<f64>() - 0.5);
    }
    for v in model.w1.data_mut() {
        *v += 0.05 * (rng.gen::<f64>() - 0.5);
    }
    model
}
