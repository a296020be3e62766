//! Topology information gain: per-node scores that combine how strongly
//! propagation committed to a class (intensity) with how little mass leaked
//! to the other classes (clarity), plus the cosine-annealed loss-weight
//! schedule driven by the resulting ranking.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Largest adjusted score of a row.
pub fn intensity(z_star_row: &[f64]) -> f64 {
    z_star_row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Largest adjusted score minus the row total. Always non-positive: it is
/// the negated mass that went to non-winning classes, so values nearer zero
/// mean a cleaner winner.
pub fn clarity(z_star_row: &[f64]) -> f64 {
    let max = intensity(z_star_row);
    let sum: f64 = z_star_row.iter().sum();
    max - sum
}

/// Per-node score `T_i = intensity_i + (lambda / (k - 1)) * clarity_i`.
pub fn tig_scores(z_star: &DenseMatrix, lambda: f64) -> Result<Vec<f64>> {
    let k = z_star.cols();
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "scores need at least 2 classes to balance clarity, got {k}"
        )));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParameter(format!("lambda must be non-negative, got {lambda}")));
    }
    let scale = lambda / (k - 1) as f64;
    Ok((0..z_star.rows())
        .map(|i| {
            let row = z_star.row(i);
            intensity(row) + scale * clarity(row)
        })
        .collect())
}

/// Ascending rank of each node's score; ties break toward the smaller node
/// id. `rank[i] = 0` marks the lowest-scoring node.
pub fn rank_ascending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut ranks = vec![0usize; scores.len()];
    for (pos, &node) in order.iter().enumerate() {
        ranks[node] = pos;
    }
    ranks
}

/// Cosine-annealed loss weights over ranks:
/// `w_i = w_min + 0.5 * (w_max - w_min) * (1 + cos(rank_i * pi / n))`.
///
/// Rank 0 (the lowest score) gets `w_max`; weights decay monotonically
/// toward `w_min` as rank grows.
pub fn cl_weights(ranks: &[usize], w_min: f64, w_max: f64) -> Result<Vec<f64>> {
    let n = ranks.len();
    if n == 0 {
        return Err(Error::InvalidParameter("weight schedule needs at least one node".into()));
    }
    if !(w_min.is_finite() && w_max.is_finite()) || w_min > w_max {
        return Err(Error::InvalidParameter(format!(
            "weight bounds must satisfy w_min <= w_max, got [{w_min}, {w_max}]"
        )));
    }
    let half_span = 0.5 * (w_max - w_min);
    Ok(ranks
        .iter()
        .map(|&r| w_min + half_span * (1.0 + (r as f64 * PI / n as f64).cos()))
        .collect())
}

/// Everything downstream consumers need about the score landscape.
#[derive(Clone, Debug)]
pub struct TigProfile {
    pub intensity: Vec<f64>,
    pub clarity: Vec<f64>,
    pub tig: Vec<f64>,
    pub rank: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Computes scores, ranks, and the weight schedule in one pass.
pub fn profile(z_star: &DenseMatrix, lambda: f64, w_min: f64, w_max: f64) -> Result<TigProfile> {
    let tig = tig_scores(z_star, lambda)?;
    let rank = rank_ascending(&tig);
    let weights = cl_weights(&rank, w_min, w_max)?;
    let intensity_v = (0..z_star.rows()).map(|i| intensity(z_star.row(i))).collect();
    let clarity_v = (0..z_star.rows()).map(|i| clarity(z_star.row(i))).collect();
    Ok(TigProfile { intensity: intensity_v, clarity: clarity_v, tig, rank, weights })
}

/// One cell of the intensity-by-clarity error grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub count: usize,
    pub errors: usize,
    /// `None` marks an empty cell.
    pub error_rate: Option<f64>,
}

/// Misclassification rates over a `dim x dim` grid of min-max scaled
/// (intensity, clarity) coordinates. Only nodes with a reference label
/// enter; pass `None` to exclude a node (train nodes, say).
#[derive(Clone, Debug)]
pub struct GridReport {
    pub dim: usize,
    /// Indexed `[intensity_bin][clarity_bin]`; bin 0 is the low end.
    pub cells: Vec<Vec<GridCell>>,
}

pub fn grid_report(
    intensity: &[f64],
    clarity: &[f64],
    predictions: &[usize],
    labels: &[Option<usize>],
    dim: usize,
) -> Result<GridReport> {
    if dim == 0 {
        return Err(Error::InvalidParameter("grid dimension must be positive".into()));
    }
    let n = intensity.len();
    if clarity.len() != n || predictions.len() != n || labels.len() != n {
        return Err(Error::InvalidParameter(
            "grid inputs must share one length per node".into(),
        ));
    }
    let included: Vec<usize> = (0..n).filter(|&i| labels[i].is_some()).collect();
    let scale = |values: &[f64]| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in &included {
            lo = lo.min(values[i]);
            hi = hi.max(values[i]);
        }
        (lo, hi)
    };
    let (ilo, ihi) = scale(intensity);
    let (clo, chi) = scale(clarity);
    let bin = |v: f64, lo: f64, hi: f64| -> usize {
        if hi <= lo {
            return 0;
        }
        let t = (v - lo) / (hi - lo);
        ((t * dim as f64) as usize).min(dim - 1)
    };
    let mut cells = vec![vec![GridCell { count: 0, errors: 0, error_rate: None }; dim]; dim];
    for &i in &included {
        let ib = bin(intensity[i], ilo, ihi);
        let cb = bin(clarity[i], clo, chi);
        let cell = &mut cells[ib][cb];
        cell.count += 1;
        if Some(predictions[i]) != labels[i] {
            cell.errors += 1;
        }
    }
    for row in cells.iter_mut() {
        for cell in row.iter_mut() {
            if cell.count > 0 {
                cell.error_rate = Some(cell.errors as f64 / cell.count as f64);
            }
        }
    }
    Ok(GridReport { dim, cells })
}

/// Accuracy within one score-ordered bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinAccuracy {
    pub count: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
}

/// Splits labeled nodes into `n_bins` quantile bins by descending score
/// (bin 0 holds the highest scores) and reports per-bin accuracy. Bin sizes
/// differ by at most one, with earlier bins taking the remainder.
pub fn tig_bin_accuracy(
    tig: &[f64],
    predictions: &[usize],
    labels: &[Option<usize>],
    n_bins: usize,
) -> Result<Vec<BinAccuracy>> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let n = tig.len();
    if predictions.len() != n || labels.len() != n {
        return Err(Error::InvalidParameter(
            "bin inputs must share one length per node".into(),
        ));
    }
    let mut included: Vec<usize> = (0..n).filter(|&i| labels[i].is_some()).collect();
    included.sort_by(|&a, &b| {
        tig[b].partial_cmp(&tig[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let total = included.len();
    let base = total / n_bins;
    let extra = total % n_bins;
    let mut bins = Vec::with_capacity(n_bins);
    let mut cursor = 0;
    for b in 0..n_bins {
        let size = base + usize::from(b < extra);
        let slice = &included[cursor..cursor + size];
        cursor += size;
        let correct = slice.iter().filter(|&&i| Some(predictions[i]) == labels[i]).count();
        let accuracy = (size > 0).then(|| correct as f64 / size as f64);
        bins.push(BinAccuracy { count: size, correct, accuracy });
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clarity_is_max_minus_total() {
        let row = [0.6, 0.3, 0.1];
        assert!((clarity(&row) - (-0.4)).abs() < 1e-12);
        assert!((intensity(&row) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn tig_combines_both_terms() {
        let z = DenseMatrix::from_rows(&[vec![0.6, 0.3, 0.1]]);
        let t = tig_scores(&z, 0.1).unwrap();
        // 0.6 + (0.1 / 2) * (-0.4)
        assert!((t[0] - 0.58).abs() < 1e-12);
    }

    #[test]
    fn tig_rejects_single_class() {
        let z = DenseMatrix::from_rows(&[vec![1.0]]);
        assert!(tig_scores(&z, 0.1).is_err());
    }

    #[test]
    fn ranks_sort_ascending() {
        assert_eq!(rank_ascending(&[0.3, 0.1, 0.2]), vec![2, 0, 1]);
    }

    #[test]
    fn rank_ties_break_by_node_id() {
        assert_eq!(rank_ascending(&[0.5, 0.5, 0.1]), vec![1, 2, 0]);
    }

    #[test]
    fn weight_schedule_endpoints() {
        let ranks = vec![0, 1, 2, 3];
        let w = cl_weights(&ranks, 1.0, 2.0).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-12, "rank 0 gets the top weight");
        // Rank n/2 sits at the midpoint of the band.
        assert!((w[2] - 1.5).abs() < 1e-12);
        // Monotone non-increasing along ranks.
        for pair in w.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        assert!(w[3] >= 1.0 && w[3] <= 2.0);
    }

    #[test]
    fn equal_bounds_flatten_the_schedule() {
        let w = cl_weights(&[0, 1, 2], 1.5, 1.5).unwrap();
        assert!(w.iter().all(|&v| v == 1.5));
    }

    #[test]
    fn weight_schedule_rejects_empty_and_inverted() {
        assert!(cl_weights(&[], 1.0, 2.0).is_err());
        assert!(cl_weights(&[0], 2.0, 1.0).is_err());
    }

    #[test]
    fn profile_ties_pieces_together() {
        let z = DenseMatrix::from_rows(&[vec![0.6, 0.3, 0.1], vec![0.2, 0.2, 0.2]]);
        let p = profile(&z, 0.1, 1.0, 2.0).unwrap();
        assert!((p.tig[0] - 0.58).abs() < 1e-12);
        // Row 1: intensity 0.2, clarity -0.4, tig 0.2 - 0.02 = 0.18.
        assert!((p.tig[1] - 0.18).abs() < 1e-12);
        assert_eq!(p.rank, vec![1, 0]);
        assert!((p.weights[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_counts_and_rates() {
        let intensity = [0.0, 1.0, 1.0, 0.5];
        let clarity = [-1.0, 0.0, 0.0, -0.5];
        let predictions = [0, 1, 0, 1];
        let labels = [Some(0), Some(1), Some(1), None];
        let report = grid_report(&intensity, &clarity, &predictions, &labels, 2).unwrap();
        // Node 3 is excluded; nodes 1 and 2 share the top-right cell.
        assert_eq!(report.cells[0][0].count, 1);
        assert_eq!(report.cells[0][0].error_rate, Some(0.0));
        assert_eq!(report.cells[1][1].count, 2);
        assert_eq!(report.cells[1][1].errors, 1);
        assert_eq!(report.cells[1][1].error_rate, Some(0.5));
        assert_eq!(report.cells[0][1].error_rate, None);
        let total: usize = report.cells.iter().flatten().map(|c| c.count).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn grid_handles_constant_coordinates() {
        let intensity = [0.4, 0.4];
        let clarity = [-0.1, -0.1];
        let report = grid_report(&intensity, &clarity, &[0, 0], &[Some(0), Some(1)], 3).unwrap();
        assert_eq!(report.cells[0][0].count, 2);
    }

    #[test]
    fn bins_order_by_descending_score() {
        let tig = [0.9, 0.1, 0.5, 0.7, 0.3];
        let predictions = [0, 1, 0, 0, 0];
        let labels = [Some(0), Some(0), Some(0), Some(1), Some(0)];
        let bins = tig_bin_accuracy(&tig, &predictions, &labels, 2).unwrap();
        // Descending order: nodes 0 (0.9), 3 (0.7), 2 (0.5) | 4 (0.3), 1 (0.1).
        assert_eq!(bins[0].count, 3);
        assert_eq!(bins[0].correct, 2);
        assert_eq!(bins[1].count, 2);
        assert_eq!(bins[1].correct, 1);
    }

    #[test]
    fn bins_exclude_unlabeled_nodes() {
        let tig = [0.9, 0.1];
        let bins = tig_bin_accuracy(&tig, &[0, 0], &[Some(0), None], 2).unwrap();
        assert_eq!(bins[0].count, 1);
        assert_eq!(bins[1].count, 0);
        assert_eq!(bins[1].accuracy, None);
    }

    proptest! {
        /// Schedule invariants over random score vectors: bounds hold, the
        /// lowest rank gets w_max, and weights never increase along ranks.
        #[test]
        fn schedule_invariants(scores in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let ranks = rank_ascending(&scores);
            let w = cl_weights(&ranks, 1.0, 2.0).unwrap();
            let mut by_rank = vec![0.0; w.len()];
            for (i, &r) in ranks.iter().enumerate() {
                by_rank[r] = w[i];
            }
            prop_assert!((by_rank[0] - 2.0).abs() < 1e-12);
            for pair in by_rank.windows(2) {
                prop_assert!(pair[0] >= pair[1] - 1e-12);
            }
            for &v in &w {
                prop_assert!((1.0..=2.0).contains(&v));
            }
        }

        /// Ranks are a permutation and respect score order.
        #[test]
        fn ranks_are_a_permutation(scores in proptest::collection::vec(-5.0f64..5.0, 1..30)) {
            let ranks = rank_ascending(&scores);
            let mut seen = vec![false; ranks.len()];
            for &r in &ranks {
                prop_assert!(r < ranks.len());
                prop_assert!(!seen[r]);
                seen[r] = true;
            }
            for i in 0..scores.len() {
                for j in 0..scores.len() {
                    if scores[i] < scores[j] {
                        prop_assert!(ranks[i] < ranks[j]);
                    }
                }
            }
        }
    }
}
