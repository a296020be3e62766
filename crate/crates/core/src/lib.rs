//! Topology-information-gain aware graph contrastive learning (TIFA-GCL)
//! for semi-supervised node classification.
//!
//! The pipeline: label propagation with restart produces per-node class-mass
//! vectors; the prototype-adjusted result (`Z*`) is scored into a topology
//! information gain (TIG) profile; the profile drives a cosine-annealed
//! contrastive-loss weight schedule, distance-based positive/negative pair
//! sampling, TIG-weighted graph perturbation, and distance-weighted
//! random-walk subgraph sampling; a two-layer GCN with hand-rolled exact
//! gradients ties everything together in three training modes
//! (`baseline`, `uniform-gcl`, `tifa-gcl`).
//!
//! Hot kernels are row-parallel via rayon when the `parallel` feature
//! (default) is enabled; every kernel has a sequential path producing
//! bitwise-identical results, used as the reference in tests and benches.

pub mod distance;
pub mod error;
pub mod exec;
pub mod gnn;
pub mod graph;
pub mod label_prop;
pub mod linalg;
pub mod perturb;
pub mod pipeline;
pub mod rng;
pub mod sampler;
pub mod tig;

pub use error::{Error, Result};
