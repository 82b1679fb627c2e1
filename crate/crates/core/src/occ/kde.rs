//! Isotropic Gaussian kernel density estimate, scored as negative log density.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::knn;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `n^(-1/(d+4))` times the mean per-dimension sample standard deviation.
    #[default]
    Scott,
    Fixed(f64),
}

/// Scott's rule; falls back to 1 when the data has no spread.
pub fn scott_bandwidth(train: ArrayView2<f64>) -> f64 {
    let (n, d) = train.dim();
    let sigma = if n > 1 {
        train.std_axis(Axis(0), 1.0).mean().unwrap_or(0.0)
    } else {
        0.0
    };
    if sigma > 0.0 {
        (n as f64).powf(-1.0 / (d as f64 + 4.0)) * sigma
    } else {
        1.0
    }
}

#[derive(Debug, Clone)]
pub struct Kde {
    train: Array2<f64>,
    bandwidth: f64,
}

impl Kde {
    pub(crate) fn fit(train: ArrayView2<f64>, bandwidth: f64) -> Self {
        Self {
            train: train.to_owned(),
            bandwidth,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `ln( (1/n) sum_i N(x; x_i, h^2 I) )`, via log-sum-exp.
    pub fn log_density(&self, x: ArrayView1<f64>) -> f64 {
        let (n, d) = self.train.dim();
        let h2 = self.bandwidth * self.bandwidth;
        let exps: Vec<f64> = self
            .train
            .rows()
            .into_iter()
            .map(|row| -knn::sq_dist(row, x) / (2.0 * h2))
            .collect();
        let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + exps.iter().map(|e| (e - max).exp()).sum::<f64>().ln();
        lse - (n as f64).ln() - 0.5 * d as f64 * (2.0 * PI * h2).ln()
    }

    pub fn score(&self, x: ArrayView1<f64>) -> f64 {
        -self.log_density(x)
    }
}
