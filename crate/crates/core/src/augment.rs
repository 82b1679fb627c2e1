//! Latent-space oversampling baselines and the training-set dispatcher.
//!
//! Every augmenter returns the input rows unchanged as a prefix, followed by
//! the synthetic rows.

use std::fmt;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::autoencoder::AugmentedLatentSet;
use crate::error::{Error, Result};
use crate::knn;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentMethod {
    None,
    Smote,
    Adasyn,
    Noise,
    AeEpochs,
}

impl AugmentMethod {
    pub const ALL: [AugmentMethod; 5] = [
        AugmentMethod::None,
        AugmentMethod::Smote,
        AugmentMethod::Adasyn,
        AugmentMethod::Noise,
        AugmentMethod::AeEpochs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentMethod::None => "none",
            AugmentMethod::Smote => "smote",
            AugmentMethod::Adasyn => "adasyn",
            AugmentMethod::Noise => "noise",
            AugmentMethod::AeEpochs => "ae_epochs",
        }
    }
}

impl fmt::Display for AugmentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AugmentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown augmentation method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub method: AugmentMethod,
    pub k_neighbors: usize,
    /// Output rows are about `target_multiplier` times the input rows.
    pub target_multiplier: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            method: AugmentMethod::None,
            k_neighbors: 5,
            target_multiplier: 2.0,
            noise_sigma: 0.05,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    fn synthetic_budget(&self, n: usize) -> Result<usize> {
        if !(self.target_multiplier >= 1.0 && self.target_multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "target multiplier {} must be at least 1",
                self.target_multiplier
            )));
        }
        Ok(((self.target_multiplier - 1.0) * n as f64).round() as usize)
    }
}

fn check_neighbors(n: usize, k: usize) -> Result<()> {
    if k == 0 || n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} rows cannot supply {k} nearest neighbours"
        )));
    }
    Ok(())
}

fn neighbor_table(x: ArrayView2<f64>, k: usize) -> Vec<Vec<(f64, usize)>> {
    (0..x.nrows())
        .map(|i| knn::k_nearest_of_row(x, i, k))
        .collect()
}

/// `x + lambda (x_nn - x)` with a uniform neighbour and `lambda ~ U[0, 1]`.
fn interpolate(
    x: ArrayView2<f64>,
    seed_row: usize,
    neighbors: &[(f64, usize)],
    r: &mut rng::Rng,
) -> Vec<f64> {
    let nn = neighbors[r.random_range(0..neighbors.len())].1;
    let lambda: f64 = r.random_range(0.0..=1.0);
    x.row(seed_row)
        .iter()
        .zip(x.row(nn).iter())
        .map(|(a, b)| a + lambda * (b - a))
        .collect()
}

fn append_rows(x: ArrayView2<f64>, synthetic: Vec<f64>) -> Array2<f64> {
    let d = x.ncols();
    let extra = Array2::from_shape_vec((synthetic.len() / d.max(1), d), synthetic)
        .expect("synthetic rows have the input width");
    concatenate(Axis(0), &[x, extra.view()]).expect("same width")
}

pub fn smote(latents: ArrayView2<f64>, cfg: &AugmentConfig) -> Result<Array2<f64>> {
    let budget = cfg.synthetic_budget(latents.nrows())?;
    smote_n(latents, budget, cfg)
}

/// SMOTE producing exactly `n_synthetic` new rows.
pub fn smote_n(
    latents: ArrayView2<f64>,
    n_synthetic: usize,
    cfg: &AugmentConfig,
) -> Result<Array2<f64>> {
    let n = latents.nrows();
    check_neighbors(n, cfg.k_neighbors)?;
    let table = neighbor_table(latents, cfg.k_neighbors);
    let mut r = rng::seeded(cfg.seed);
    let mut synthetic = Vec::with_capacity(n_synthetic * latents.ncols());
    for _ in 0..n_synthetic {
        let i = r.random_range(0..n);
        synthetic.extend(interpolate(latents, i, &table[i], &mut r));
    }
    Ok(append_rows(latents, synthetic))
}

/// Splits `budget` across rows proportionally to `weights` (which sum to 1),
/// flooring first and handing the remainder to the largest fractional parts
/// (ties to the lower index).
pub fn largest_remainder(weights: &[f64], budget: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * budget as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(budget.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// Per-row ADASYN weights for a single class: mean distance to the `k`
/// nearest neighbours, normalised to sum to one. Uniform if every distance
/// is zero.
pub fn adasyn_weights(latents: ArrayView2<f64>, k: usize) -> Result<Vec<f64>> {
    check_neighbors(latents.nrows(), k)?;
    Ok(difficulty_weights(&neighbor_table(latents, k)))
}

fn difficulty_weights(table: &[Vec<(f64, usize)>]) -> Vec<f64> {
    normalise(
        table
            .iter()
            .map(|nn| nn.iter().map(|(d, _)| d).sum::<f64>() / nn.len() as f64)
            .collect(),
    )
}

fn normalise(v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.into_iter().map(|x| x / total).collect()
    } else {
        let n = v.len() as f64;
        vec![1.0 / n; v.len()]
    }
}

pub fn adasyn(latents: ArrayView2<f64>, cfg: &AugmentConfig) -> Result<Array2<f64>> {
    let budget = cfg.synthetic_budget(latents.nrows())?;
    adasyn_n(latents, budget, cfg)
}

/// ADASYN producing exactly `n_synthetic` new rows, allocated to seed rows by
/// [`adasyn_weights`].
pub fn adasyn_n(
    latents: ArrayView2<f64>,
    n_synthetic: usize,
    cfg: &AugmentConfig,
) -> Result<Array2<f64>> {
    check_neighbors(latents.nrows(), cfg.k_neighbors)?;
    let table = neighbor_table(latents, cfg.k_neighbors);
    let alloc = largest_remainder(&difficulty_weights(&table), n_synthetic);
    let mut r = rng::seeded(cfg.seed);
    let mut synthetic = Vec::with_capacity(n_synthetic * latents.ncols());
    for (i, &count) in alloc.iter().enumerate() {
        for _ in 0..count {
            synthetic.extend(interpolate(latents, i, &table[i], &mut r));
        }
    }
    Ok(append_rows(latents, synthetic))
}

pub fn noise_augment(latents: ArrayView2<f64>, cfg: &AugmentConfig) -> Result<Array2<f64>> {
    let budget = cfg.synthetic_budget(latents.nrows())?;
    noise_augment_n(latents, budget, cfg)
}

/// Appends `n_synthetic` Gaussian-perturbed copies, cycling through the rows
/// in order (all rows get a first copy before any gets a second).
pub fn noise_augment_n(
    latents: ArrayView2<f64>,
    n_synthetic: usize,
    cfg: &AugmentConfig,
) -> Result<Array2<f64>> {
    let n = latents.nrows();
    if n == 0 {
        return Err(Error::InsufficientData(
            "noise augmentation of zero rows".into(),
        ));
    }
    let normal = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|e| Error::Config(format!("noise sigma {}: {e}", cfg.noise_sigma)))?;
    if cfg.noise_sigma.is_nan() || cfg.noise_sigma <= 0.0 {
        return Err(Error::Config("noise sigma must be positive".into()));
    }
    let mut r = rng::seeded(cfg.seed);
    let mut synthetic = Vec::with_capacity(n_synthetic * latents.ncols());
    for c in 0..n_synthetic {
        synthetic.extend(latents.row(c % n).iter().map(|v| v + normal.sample(&mut r)));
    }
    Ok(append_rows(latents, synthetic))
}

/// Builds the detector training set for `method`.
///
/// Baselines start from `final_latents` (the trained model's encoding of the
/// training rows). When a harvest is supplied they are grown to the same row
/// count as the harvest so every arm trains on equally many rows; otherwise
/// `cfg.target_multiplier` decides the size.
pub fn make_training_set(
    method: AugmentMethod,
    final_latents: ArrayView2<f64>,
    harvest: Option<&AugmentedLatentSet>,
    cfg: &AugmentConfig,
) -> Result<Array2<f64>> {
    let n = final_latents.nrows();
    let budget = match harvest {
        Some(h) => h.matrix.nrows().saturating_sub(n),
        None => cfg.synthetic_budget(n)?,
    };
    match method {
        AugmentMethod::None => Ok(final_latents.to_owned()),
        AugmentMethod::Smote => smote_n(final_latents, budget, cfg),
        AugmentMethod::Adasyn => adasyn_n(final_latents, budget, cfg),
        AugmentMethod::Noise => noise_augment_n(final_latents, budget, cfg),
        AugmentMethod::AeEpochs => harvest.map(|h| h.matrix.clone()).ok_or_else(|| {
            Error::Config("ae_epochs augmentation needs a harvested latent set".into())
        }),
    }
}

/// Writes rows as CSV with `z0, z1, ...` headers.
pub fn write_matrix_csv(path: impl AsRef<std::path::Path>, m: ArrayView2<f64>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record((0..m.ncols()).map(|j| format!("z{j}")))?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
