//! Row-parallel execution helpers with a sequential reference path.
//!
//! All data parallelism in this crate flows through these functions. Each
//! output row is produced by an independent closure call writing a disjoint
//! slot, and per-row reductions run in a fixed order, so the parallel and
//! sequential paths are bitwise identical. `ExecMode::Parallel` uses the
//! rayon pool when the `parallel` feature (default) is enabled and silently
//! degrades to the sequential loop when it is not.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Parallel,
    Sequential,
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::Parallel
    }
}

/// Fills `out` (a flat row-major buffer) by calling `f(row, chunk)` per row.
pub fn fill_rows<T, F>(mode: ExecMode, out: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    assert!(row_len > 0, "row_len must be positive");
    assert_eq!(out.len() % row_len, 0, "buffer not a whole number of rows");
    match mode {
        ExecMode::Parallel => fill_rows_par(out, row_len, &f),
        ExecMode::Sequential => {
            for (i, chunk) in out.chunks_mut(row_len).enumerate() {
                f(i, chunk);
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn fill_rows_par<T, F>(out: &mut [T], row_len: usize, f: &F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    out.par_chunks_mut(row_len).enumerate().for_each(|(i, chunk)| f(i, chunk));
}

#[cfg(not(feature = "parallel"))]
fn fill_rows_par<T, F>(out: &mut [T], row_len: usize, f: &F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    for (i, chunk) in out.chunks_mut(row_len).enumerate() {
        f(i, chunk);
    }
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    match mode {
        ExecMode::Parallel => map_indexed_par(n, &f),
        ExecMode::Sequential => (0..n).map(f).collect(),
    }
}

#[cfg(feature = "parallel")]
fn map_indexed_par<T, F>(n: usize, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed_par<T, F>(n: usize, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}
