//! Exact brute-force nearest neighbours over the rows of a matrix.

use ndarray::{ArrayView1, ArrayView2};

pub(crate) fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    match (a.as_slice(), b.as_slice()) {
        (Some(a), Some(b)) => sq_dist_slice(a, b),
        _ => a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum(),
    }
}

pub(crate) fn sq_dist_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Distances from `query` to every row of `data`, optionally skipping one row.
/// Returned pairs are sorted by distance, ties by lower row index.
pub(crate) fn sorted_distances(
    data: ArrayView2<f64>,
    query: ArrayView1<f64>,
    exclude: Option<usize>,
) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = data
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, row)| (dist(row, query), i))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// The `k` nearest other rows of row `i` (self excluded).
pub(crate) fn k_nearest_of_row(data: ArrayView2<f64>, i: usize, k: usize) -> Vec<(f64, usize)> {
    let mut d = sorted_distances(data, data.row(i), Some(i));
    d.truncate(k);
    d
}
