//! Dense row-major matrices and the few vector kernels the pipeline needs.
//!
//! Matrices here are desk-scale (thousands of rows, tens of columns), so a
//! flat `Vec<f64>` with row-parallel products beats pulling in a BLAS. Every
//! product accumulates in a fixed order per output entry, keeping parallel
//! and sequential results bitwise identical.

use crate::exec::{self, ExecMode};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds from a flat row-major buffer; `data.len()` must equal `rows*cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        DenseMatrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self · other`, row-parallel.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        self.matmul_with(other, ExecMode::Parallel)
    }

    pub fn matmul_with(&self, other: &DenseMatrix, mode: ExecMode) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions disagree");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        let oc = other.cols;
        exec::fill_rows(mode, &mut out.data, oc, |i, chunk| {
            let a_row = self.row(i);
            for (l, &a) in a_row.iter().enumerate() {
                let b_row = other.row(l);
                for (c, v) in chunk.iter_mut().enumerate() {
                    *v += a * b_row[c];
                }
            }
        });
        out
    }

    /// `selfᵀ · other` without materializing the transpose (self and other
    /// share their row count). Accumulation runs over rows in ascending order.
    pub fn transpose_matmul(&self, other: &DenseMatrix, mode: ExecMode) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "row counts disagree");
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        let oc = other.cols;
        exec::fill_rows(mode, &mut out.data, oc, |c1, chunk| {
            for r in 0..self.rows {
                let a = self.get(r, c1);
                let b_row = other.row(r);
                for (c2, v) in chunk.iter_mut().enumerate() {
                    *v += a * b_row[c2];
                }
            }
        });
        out
    }

    /// `self · otherᵀ` (other is m × cols), row-parallel.
    pub fn matmul_transpose_b(&self, other: &DenseMatrix, mode: ExecMode) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "column counts disagree");
        let mut out = DenseMatrix::zeros(self.rows, other.rows);
        let om = other.rows;
        exec::fill_rows(mode, &mut out.data, om, |i, chunk| {
            let a_row = self.row(i);
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = dot(a_row, other.row(j));
            }
        });
        out
    }

    /// `self += s · other`, entrywise.
    pub fn add_scaled(&mut self, other: &DenseMatrix, s: f64) {
        assert_eq!(self.data.len(), other.data.len(), "shapes disagree");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "shapes disagree");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Row-wise stable softmax.
    pub fn softmax_rows(&self, mode: ExecMode) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        let cols = self.cols;
        exec::fill_rows(mode, &mut out.data, cols, |i, chunk| {
            softmax_into(self.row(i), chunk);
        });
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += x * y;
    }
    s
}

/// Stable softmax of `row` into `out` (max shifted before exponentiation).
pub fn softmax_into(row: &[f64], out: &mut [f64]) {
    debug_assert_eq!(row.len(), out.len());
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(row.iter()) {
        let e = (v - m).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Stable log-softmax: `out[c] = row[c] - logsumexp(row)`.
pub fn log_softmax_into(row: &[f64], out: &mut [f64]) {
    debug_assert_eq!(row.len(), out.len());
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for &v in row.iter() {
        sum += (v - m).exp();
    }
    let lse = m + sum.ln();
    for (o, &v) in out.iter_mut().zip(row.iter()) {
        *o = v - lse;
    }
}

/// Cosine similarity; either vector having zero norm yields 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot(a, b) / (na * nb)
}

/// KL divergence Σ p·ln(p/q) in nats. Zero-probability `p` entries
/// contribute nothing; `q` is expected strictly positive there.
pub fn kl_div(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi > 0.0 {
            s += pi * (pi / qi).ln();
        }
    }
    s
}
