//! Parallel-versus-sequential timings for the kernels behind training:
//! score propagation, the GCN forward pass, pair mining, and walk
//! sampling. Both paths produce bitwise-identical results, so these
//! benches measure pure scheduling overhead and speedup.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use tifa_gcl::distance::{sample_pairs, DistanceConfig, DistanceInputs, PairIndices};
use tifa_gcl::exec::ExecMode;
use tifa_gcl::gnn::{forward, GcnModel};
use tifa_gcl::graph::{synth_sbm, Graph, NormKind, SbmParams};
use tifa_gcl::label_prop::{self, initial_scores, propagate, LpConfig};
use tifa_gcl::linalg::DenseMatrix;
use tifa_gcl::rng;
use tifa_gcl::sampler::{sample_subgraph, transition_probs_from_scores, SamplerConfig};

const MODES: [(&str, ExecMode); 2] =
    [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)];

fn block_graph(per_class: usize, seed: u64) -> Graph {
    let params = SbmParams {
        k: 4,
        per_class,
        p_in: 0.02,
        p_out: 0.002,
        noise: 0.5,
        labels_per_class: 20,
    };
    synth_sbm(&params, seed).unwrap()
}

fn bench_propagate(c: &mut Criterion) {
    let graph = block_graph(300, 1);
    let adj = graph.normalized(NormKind::Column);
    let z0 = initial_scores(graph.labels(), graph.train_mask(), graph.num_classes());
    let config = LpConfig::default();
    let mut group = c.benchmark_group("propagate-n1200");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| propagate(black_box(&adj), black_box(&z0), &config, mode).unwrap());
        });
    }
    group.finish();
}

fn bench_forward(c: &mut Criterion) {
    let graph = block_graph(300, 2);
    let adj = graph.normalized(NormKind::Symmetric);
    let mut feature_rng = rng::stream(2, "bench-features", 0);
    let rows: Vec<Vec<f64>> = (0..graph.n())
        .map(|_| (0..64).map(|_| feature_rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let x = DenseMatrix::from_rows(&rows);
    let model = GcnModel::init(64, 64, 8, 2);
    let mut group = c.benchmark_group("gcn-forward-n1200-h64");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| forward(black_box(&adj), black_box(&x), &model.w0, &model.w1, None, mode));
        });
    }
    group.finish();
}

fn bench_pair_sampling(c: &mut Criterion) {
    let params = SbmParams {
        k: 2,
        per_class: 200,
        p_in: 0.03,
        p_out: 0.01,
        noise: 0.5,
        labels_per_class: 10,
    };
    let graph = synth_sbm(&params, 3).unwrap();
    let lp = label_prop::run(&graph, &LpConfig::default(), ExecMode::Parallel).unwrap();
    let inputs = DistanceInputs::from_graph(&graph, &lp.z_star);
    let indices = PairIndices::default_for(graph.n() - 1).unwrap();
    let config = DistanceConfig::default();
    let mut group = c.benchmark_group("pair-sampling-n400");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| sample_pairs(black_box(&inputs), &config, indices, 3, mode).unwrap());
        });
    }
    group.finish();
}

fn bench_subgraph_walks(c: &mut Criterion) {
    let graph = block_graph(300, 4);
    let lp = label_prop::run(&graph, &LpConfig::default(), ExecMode::Parallel).unwrap();
    let probs = transition_probs_from_scores(graph.csr(), &lp.z_star, 1.0, 0.01).unwrap();
    let mut config = SamplerConfig::with_seed(4);
    config.n_roots = 200;
    config.walk_len = 5;
    let mut group = c.benchmark_group("subgraph-walks-r200");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| sample_subgraph(black_box(&graph), &probs, &config, mode).unwrap());
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_propagate,
    bench_forward,
    bench_pair_sampling,
    bench_subgraph_walks
);
criterion_main!(benches);
