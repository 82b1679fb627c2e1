//! Local Outlier Factor against a fixed reference set.

use std::collections::BinaryHeap;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::knn;

/// Denominator floor for local reachability density, so exact duplicates
/// (zero reachability distances) give a large but finite density.
pub const REACH_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Lof {
    train: Array2<f64>,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
    /// Each reference row's neighbourhood among the other rows.
    hoods: Vec<Vec<(f64, usize)>>,
}

/// k-distance of `x` and its k-distance neighbourhood among the rows of a
/// standard-layout matrix, as (distance, row) pairs in row order. Ties at the
/// k-distance are all included, so the neighbourhood may exceed `k` members.
fn neighborhood(
    train: &Array2<f64>,
    x: ArrayView1<f64>,
    exclude: Option<usize>,
    k: usize,
) -> (f64, Vec<(f64, usize)>) {
    let x = x.to_vec();
    let flat = train.as_slice().expect("standard layout");
    let sq: Vec<f64> = flat
        .chunks_exact(train.ncols().max(1))
        .map(|row| knn::sq_dist_slice(row, &x))
        .collect();
    // squared distances are non-negative, so their bit patterns sort like
    // the values themselves
    let mut heap: BinaryHeap<(u64, usize)> = BinaryHeap::with_capacity(k + 1);
    for (i, d) in sq.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        let key = (d.to_bits(), i);
        if heap.len() < k {
            heap.push(key);
        } else if key < *heap.peek().expect("k >= 1") {
            heap.pop();
            heap.push(key);
        }
    }
    // compare after the root: squares an ulp apart can share a root
    let k_dist = f64::from_bits(heap.peek().expect("k >= 1").0).sqrt();
    let hood = sq
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, d)| (d.sqrt(), i))
        .filter(|(d, _)| *d <= k_dist)
        .collect();
    (k_dist, hood)
}

impl Lof {
    /// Requires more than `k` rows.
    pub(crate) fn fit(train: ArrayView2<f64>, k: usize) -> Self {
        let train = train.as_standard_layout().into_owned();
        let n = train.nrows();
        let (k_distance, hoods): (Vec<f64>, Vec<Vec<(f64, usize)>>) = (0..n)
            .into_par_iter()
            .map(|i| neighborhood(&train, train.row(i), Some(i), k))
            .unzip();
        let lrd = hoods
            .par_iter()
            .map(|hood| lrd_of(hood, &k_distance))
            .collect();
        Self {
            train,
            k,
            k_distance,
            lrd,
            hoods,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// LOF of every reference row with the row itself left out of its own
    /// neighbourhood.
    pub(crate) fn self_scores(&self) -> Vec<f64> {
        self.hoods
            .par_iter()
            .zip(self.lrd.par_iter())
            .map(|(hood, &lrd)| self.lof_of(hood, lrd))
            .collect()
    }

    pub fn score(&self, x: ArrayView1<f64>) -> f64 {
        let (_, hood) = neighborhood(&self.train, x, None, self.k);
        let lrd_x = lrd_of(&hood, &self.k_distance);
        self.lof_of(&hood, lrd_x)
    }

    fn lof_of(&self, hood: &[(f64, usize)], lrd_x: f64) -> f64 {
        hood.iter().map(|(_, o)| self.lrd[*o]).sum::<f64>() / hood.len() as f64 / lrd_x
    }
}

fn lrd_of(hood: &[(f64, usize)], k_distance: &[f64]) -> f64 {
    let mean_reach =
        hood.iter().map(|(d, o)| d.max(k_distance[*o])).sum::<f64>() / hood.len() as f64;
    1.0 / mean_reach.max(REACH_FLOOR)
}
