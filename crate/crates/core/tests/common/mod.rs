//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the library's internals.

#![allow(dead_code)]

use aeaug_core::autoencoder::{forward, smooth_l1, AeModel};
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(r: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| r.random_range(lo..hi))
}

/// Reconstruction loss of `model` on `x` against itself.
pub fn loss(model: &AeModel, x: ArrayView2<f64>) -> f64 {
    let out = forward(model, x).unwrap();
    smooth_l1(out.recon.view(), x).unwrap()
}

/// Central differences for every weight and bias, in the same order as
/// `Gradients::iter` (all weights layer by layer, then all biases).
pub fn finite_difference(model: &AeModel, x: ArrayView2<f64>, h: f64) -> Vec<f64> {
    let mut m = model.clone();
    let mut out = Vec::new();
    for l in 0..m.layers.len() {
        let (rows, cols) = m.layers[l].weights.dim();
        for i in 0..rows {
            for j in 0..cols {
                let orig = m.layers[l].weights[[i, j]];
                m.layers[l].weights[[i, j]] = orig + h;
                let up = loss(&m, x);
                m.layers[l].weights[[i, j]] = orig - h;
                let down = loss(&m, x);
                m.layers[l].weights[[i, j]] = orig;
                out.push((up - down) / (2.0 * h));
            }
        }
    }
    for l in 0..m.layers.len() {
        for i in 0..m.layers[l].bias.len() {
            let orig = m.layers[l].bias[i];
            m.layers[l].bias[i] = orig + h;
            let up = loss(&m, x);
            m.layers[l].bias[i] = orig - h;
            let down = loss(&m, x);
            m.layers[l].bias[i] = orig;
            out.push((up - down) / (2.0 * h));
        }
    }
    out
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Textbook LOF by full sorting. `exclude` leaves a reference row out of a
/// query's neighbourhood (used for training-set self scores).
pub struct LofOracle {
    rows: Vec<Vec<f64>>,
    k: usize,
    kdist: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofOracle {
    pub fn new(x: ArrayView2<f64>, k: usize) -> Self {
        let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        let n = rows.len();
        let mut oracle = LofOracle {
            rows,
            k,
            kdist: vec![0.0; n],
            lrd: vec![0.0; n],
        };
        for i in 0..n {
            let q = oracle.rows[i].clone();
            oracle.kdist[i] = oracle.k_distance(&q, Some(i));
        }
        for i in 0..n {
            let q = oracle.rows[i].clone();
            oracle.lrd[i] = oracle.lrd_of(&q, Some(i));
        }
        oracle
    }

    fn dists(&self, q: &[f64], exclude: Option<usize>) -> Vec<(usize, f64)> {
        (0..self.rows.len())
            .filter(|&o| Some(o) != exclude)
            .map(|o| (o, euclid(q, &self.rows[o])))
            .collect()
    }

    fn k_distance(&self, q: &[f64], exclude: Option<usize>) -> f64 {
        let mut d: Vec<f64> = self.dists(q, exclude).into_iter().map(|(_, d)| d).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d[self.k - 1]
    }

    fn hood(&self, q: &[f64], exclude: Option<usize>) -> Vec<(usize, f64)> {
        let kd = self.k_distance(q, exclude);
        self.dists(q, exclude)
            .into_iter()
            .filter(|(_, d)| *d <= kd)
            .collect()
    }

    fn lrd_of(&self, q: &[f64], exclude: Option<usize>) -> f64 {
        let hood = self.hood(q, exclude);
        let mut total = 0.0;
        for (o, d) in &hood {
            total += if *d > self.kdist[*o] {
                *d
            } else {
                self.kdist[*o]
            };
        }
        1.0 / (total / hood.len() as f64).max(1e-12)
    }

    pub fn score(&self, q: &[f64], exclude: Option<usize>) -> f64 {
        let hood = self.hood(q, exclude);
        let mut total = 0.0;
        for (o, _) in &hood {
            total += self.lrd[*o];
        }
        total / hood.len() as f64 / self.lrd_of(q, exclude)
    }

    pub fn self_score(&self, i: usize) -> f64 {
        let q = self.rows[i].clone();
        self.score(&q, Some(i))
    }
}

/// All-pairs Mann-Whitney: `(#pos>neg + 0.5 #ties) / (P N)`.
pub fn roc_oracle(scores: &[f64], labels: &[bool]) -> f64 {
    let mut twice = 0u64;
    let (mut p, mut n) = (0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if li {
            p += 1;
        } else {
            n += 1;
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    twice as f64 / (2.0 * p as f64 * n as f64)
}

/// Enumerates every distinct score as a `>=` threshold, highest first, and
/// recounts precision and recall from scratch at each one.
pub fn pr_oracle(scores: &[f64], labels: &[bool]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let total_pos = labels.iter().filter(|l| **l).count() as f64;
    let mut prev = 0.0;
    let mut area = 0.0;
    for t in thresholds {
        let mut tp = 0.0;
        let mut flagged = 0.0;
        for (s, l) in scores.iter().zip(labels) {
            if *s >= t {
                flagged += 1.0;
                if *l {
                    tp += 1.0;
                }
            }
        }
        let recall = tp / total_pos;
        area += (recall - prev) * (tp / flagged);
        prev = recall;
    }
    area
}

/// Random scores drawn from a small grid so ties are common, with both
/// classes present.
pub fn tied_fixture(r: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<bool>) {
    loop {
        let levels = r.random_range(2..=(n / 2).max(3));
        let scores: Vec<f64> = (0..n)
            .map(|_| r.random_range(0..levels) as f64 / levels as f64)
            .collect();
        let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.3)).collect();
        if labels.iter().any(|l| *l) && labels.iter().any(|l| !*l) {
            return (scores, labels);
        }
    }
}

/// Two-sided signed-rank p-value by enumerating all `2^n` sign patterns.
/// Zero differences are dropped; tied magnitudes share their average rank.
pub fn wilcoxon_oracle(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].abs().partial_cmp(&d[j].abs()).unwrap());
    let mut rank = vec![0.0; n];
    let mut s = 0;
    while s < n {
        let mut e = s;
        while e < n && d[order[e]].abs() == d[order[s]].abs() {
            e += 1;
        }
        let avg = (s + 1 + e) as f64 / 2.0;
        for &i in &order[s..e] {
            rank[i] = avg;
        }
        s = e;
    }
    let total: f64 = rank.iter().sum();
    let w_plus: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| rank[i]).sum();
    let observed = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let t: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| rank[i]).sum();
        if t.min(total - t) <= observed + 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}
