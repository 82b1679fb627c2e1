//! One-class detectors fitted on (augmented) latent training sets.
//!
//! All scores follow one orientation: higher means more anomalous. LOF is
//! used as is, KDE reports negative log density and Isolation Forest its
//! standard `2^(-E[h]/c)` score. Each fitted detector carries a threshold at
//! the `1 - contamination` quantile of its training self-scores.

mod isf;
mod kde;
mod lof;

use std::fmt;
use std::path::Path;

use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::quantile;
use crate::rng;

pub use isf::{anomaly_score as isf_anomaly_score, average_path_length, IsolationForest};
pub use kde::{scott_bandwidth, Bandwidth, Kde};
pub use lof::{Lof, REACH_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Lof,
    Kde,
    Isf,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Lof, DetectorKind::Kde, DetectorKind::Isf];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Lof => "lof",
            DetectorKind::Kde => "kde",
            DetectorKind::Isf => "isf",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown detector {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OccConfig {
    pub detector: DetectorKind,
    pub lof_k: usize,
    pub contamination: f64,
    pub isf_trees: usize,
    /// `None` means `min(256, n)`.
    pub isf_subsample: Option<usize>,
    pub kde_bandwidth: Bandwidth,
    pub seed: u64,
}

impl Default for OccConfig {
    fn default() -> Self {
        Self {
            detector: DetectorKind::Lof,
            lof_k: 20,
            contamination: 0.1,
            isf_trees: 20,
            isf_subsample: None,
            kde_bandwidth: Bandwidth::Scott,
            seed: 0,
        }
    }
}

impl OccConfig {
    pub fn for_detector(detector: DetectorKind) -> Self {
        Self {
            detector,
            ..Default::default()
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.contamination > 0.0 && self.contamination <= 0.5) {
            return Err(Error::Config(format!(
                "contamination {} outside (0, 0.5]",
                self.contamination
            )));
        }
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "{n} training rows; detectors need at least 2"
            )));
        }
        match self.detector {
            DetectorKind::Lof if self.lof_k == 0 || n <= self.lof_k => {
                Err(Error::InsufficientData(format!(
                    "LOF with k={} needs more than {} rows",
                    self.lof_k, n
                )))
            }
            DetectorKind::Isf if self.isf_trees == 0 => Err(Error::Config(
                "isolation forest needs at least one tree".into(),
            )),
            DetectorKind::Isf if self.isf_subsample == Some(0) => Err(Error::Config(
                "isolation forest subsample must be positive".into(),
            )),
            DetectorKind::Kde => match self.kde_bandwidth {
                Bandwidth::Fixed(h) if !(h > 0.0 && h.is_finite()) => {
                    Err(Error::Config(format!("KDE bandwidth {h} must be positive")))
                }
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum FittedModel {
    Lof(Lof),
    Kde(Kde),
    Isf(IsolationForest),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Normal,
    Anomaly,
}

#[derive(Debug, Clone)]
pub struct OccDetector {
    model: FittedModel,
    n_features: usize,
    threshold: f64,
    training_scores: Vec<f64>,
}

impl OccDetector {
    /// Fits the configured detector and places the threshold at the
    /// `1 - contamination` quantile (linear interpolation) of the training
    /// rows' own scores. LOF self-scores leave each row out of its own
    /// neighbourhood.
    pub fn fit(train: ArrayView2<f64>, cfg: &OccConfig) -> Result<Self> {
        let n = train.nrows();
        cfg.validate(n)?;
        if train.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape(
                "training matrix contains non-finite values".into(),
            ));
        }
        let model = match cfg.detector {
            DetectorKind::Lof => FittedModel::Lof(Lof::fit(train, cfg.lof_k)),
            DetectorKind::Kde => {
                let h = match cfg.kde_bandwidth {
                    Bandwidth::Scott => scott_bandwidth(train),
                    Bandwidth::Fixed(h) => h,
                };
                FittedModel::Kde(Kde::fit(train, h))
            }
            DetectorKind::Isf => {
                let psi = cfg.isf_subsample.unwrap_or(256).min(n);
                FittedModel::Isf(IsolationForest::fit(
                    train,
                    cfg.isf_trees,
                    psi,
                    &mut rng::seeded(cfg.seed),
                ))
            }
        };
        let mut det = Self {
            model,
            n_features: train.ncols(),
            threshold: 0.0,
            training_scores: Vec::new(),
        };
        det.training_scores = match &det.model {
            FittedModel::Lof(l) => l.self_scores(),
            _ => det.score_rows(train),
        };
        det.threshold = quantile(&det.training_scores, 1.0 - cfg.contamination)?;
        Ok(det)
    }

    pub fn kind(&self) -> DetectorKind {
        match self.model {
            FittedModel::Lof(_) => DetectorKind::Lof,
            FittedModel::Kde(_) => DetectorKind::Kde,
            FittedModel::Isf(_) => DetectorKind::Isf,
        }
    }

    /// Width of the rows the detector was fitted on.
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn model(&self) -> &FittedModel {
        &self.model
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        self.threshold = threshold;
    }

    pub fn training_scores(&self) -> &[f64] {
        &self.training_scores
    }

    pub fn score(&self, x: ArrayView1<f64>) -> f64 {
        match &self.model {
            FittedModel::Lof(m) => m.score(x),
            FittedModel::Kde(m) => m.score(x),
            FittedModel::Isf(m) => m.score(x),
        }
    }

    pub fn score_rows(&self, x: ArrayView2<f64>) -> Vec<f64> {
        (0..x.nrows())
            .into_par_iter()
            .map(|i| self.score(x.row(i)))
            .collect()
    }

    /// Anomaly iff the score is strictly above the threshold.
    pub fn classify(&self, score: f64) -> Prediction {
        if score > self.threshold {
            Prediction::Anomaly
        } else {
            Prediction::Normal
        }
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> Prediction {
        self.classify(self.score(x))
    }
}

fn wrong_kind(expected: DetectorKind, got: DetectorKind) -> Error {
    Error::Config(format!("expected a fitted {expected} detector, got {got}"))
}

pub fn lof_score(det: &OccDetector, x: ArrayView1<f64>) -> Result<f64> {
    match &det.model {
        FittedModel::Lof(m) => Ok(m.score(x)),
        _ => Err(wrong_kind(DetectorKind::Lof, det.kind())),
    }
}

pub fn kde_score(det: &OccDetector, x: ArrayView1<f64>) -> Result<f64> {
    match &det.model {
        FittedModel::Kde(m) => Ok(m.score(x)),
        _ => Err(wrong_kind(DetectorKind::Kde, det.kind())),
    }
}

pub fn isf_score(det: &OccDetector, x: ArrayView1<f64>) -> Result<f64> {
    match &det.model {
        FittedModel::Isf(m) => Ok(m.score(x)),
        _ => Err(wrong_kind(DetectorKind::Isf, det.kind())),
    }
}

/// Writes `row, score, predicted, label` with 0/1 flags; `label` is empty
/// when unknown.
pub fn write_scores_csv(
    path: impl AsRef<Path>,
    scores: &[f64],
    threshold: f64,
    labels: Option<&[bool]>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["row", "score", "predicted", "label"])?;
    for (i, &s) in scores.iter().enumerate() {
        let predicted = if s > threshold { "1" } else { "0" };
        let label = labels
            .map(|l| if l[i] { "1" } else { "0" })
            .unwrap_or_default();
        w.write_record([i.to_string(), s.to_string(), predicted.into(), label.into()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2, Axis};

    fn gaussian(n: usize, d: usize, seed: u64) -> Array2<f64> {
        crate::data::synth_generate(n, 0, d, 0.0, seed)
            .unwrap()
            .matrix
    }

    fn cfg(detector: DetectorKind) -> OccConfig {
        OccConfig {
            seed: 5,
            ..OccConfig::for_detector(detector)
        }
    }

    #[test]
    fn threshold_is_ninetieth_percentile() {
        let x = gaussian(100, 3, 1);
        for kind in DetectorKind::ALL {
            let det = OccDetector::fit(x.view(), &cfg(kind)).unwrap();
            let q = quantile(det.training_scores(), 0.9).unwrap();
            assert_eq!(det.threshold(), q);
            let flagged = det
                .training_scores()
                .iter()
                .filter(|s| det.classify(**s) == Prediction::Anomaly)
                .count();
            assert!((9..=11).contains(&flagged), "{kind}: {flagged}");
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let x = gaussian(60, 2, 2);
        for kind in DetectorKind::ALL {
            let a = OccDetector::fit(x.view(), &cfg(kind)).unwrap();
            let b = OccDetector::fit(x.view(), &cfg(kind)).unwrap();
            assert_eq!(a.threshold(), b.threshold());
            assert_eq!(a.score_rows(x.view()), b.score_rows(x.view()));
        }
    }

    #[test]
    fn lof_needs_more_rows_than_k() {
        let x = gaussian(10, 2, 3);
        assert!(matches!(
            OccDetector::fit(x.view(), &cfg(DetectorKind::Lof)),
            Err(Error::InsufficientData(_))
        ));
        let bad = OccConfig {
            contamination: 0.0,
            ..cfg(DetectorKind::Kde)
        };
        assert!(OccDetector::fit(x.view(), &bad).is_err());
    }

    #[test]
    fn lof_of_duplicate_in_uniform_grid_near_one() {
        let grid = Array2::from_shape_fn((100, 2), |(i, j)| {
            if j == 0 {
                (i % 10) as f64
            } else {
                (i / 10) as f64
            }
        });
        let det = OccDetector::fit(grid.view(), &cfg(DetectorKind::Lof)).unwrap();
        let s = lof_score(&det, array![4.0, 5.0].view()).unwrap();
        assert!((0.8..=1.2).contains(&s), "{s}");
        let far = lof_score(&det, array![40.0, 40.0].view()).unwrap();
        assert!(far > 2.0);
    }

    #[test]
    fn lof_far_query_scores_high() {
        let x = gaussian(200, 2, 4);
        let det = OccDetector::fit(x.view(), &cfg(DetectorKind::Lof)).unwrap();
        assert!(det.score(array![10.0, 0.0].view()) > 2.0);
    }

    #[test]
    fn lof_exact_duplicates_stay_finite() {
        let x = Array2::from_elem((30, 2), 0.5);
        let det = OccDetector::fit(x.view(), &cfg(DetectorKind::Lof)).unwrap();
        assert!(det.training_scores().iter().all(|s| s.is_finite()));
        assert!(det.score(array![0.5, 0.5].view()).is_finite());
    }

    #[test]
    fn kde_closed_form_single_point() {
        let c = OccConfig {
            kde_bandwidth: Bandwidth::Fixed(1.0),
            ..cfg(DetectorKind::Kde)
        };
        let x = array![[0.3], [0.3]];
        let det = OccDetector::fit(x.view(), &c).unwrap();
        let s = kde_score(&det, array![0.3].view()).unwrap();
        let expected = -(1.0 / (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.9189).abs() < 1e-4);
    }

    #[test]
    fn kde_density_integrates_to_one() {
        let train = array![[-1.0], [0.0], [0.3], [1.2], [2.0]];
        let kde = Kde::fit(train.view(), scott_bandwidth(train.view()));
        // midpoint rule over [-8, 10] standing in for the Monte Carlo box
        let (lo, hi, steps) = (-8.0, 10.0, 20_000);
        let dx = (hi - lo) / steps as f64;
        let total: f64 = (0..steps)
            .map(|i| {
                let x = lo + (i as f64 + 0.5) * dx;
                kde.log_density(array![x].view()).exp() * dx
            })
            .sum();
        assert!((total - 1.0).abs() < 0.02, "{total}");
    }

    #[test]
    fn kde_monotone_along_ray() {
        let x = gaussian(50, 3, 6);
        let det = OccDetector::fit(x.view(), &cfg(DetectorKind::Kde)).unwrap();
        let dir = array![1.0, -0.5, 0.25];
        let mut prev = f64::NEG_INFINITY;
        for step in 0..40 {
            let t = 4.0 + step as f64 * 0.5;
            let s = det.score((&dir * t).view());
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn kde_permutation_and_duplication_invariant() {
        let x = gaussian(40, 2, 7);
        let c = OccConfig {
            kde_bandwidth: Bandwidth::Fixed(0.4),
            ..cfg(DetectorKind::Kde)
        };
        let a = OccDetector::fit(x.view(), &c).unwrap();
        let mut rev = x.clone();
        rev.invert_axis(Axis(0));
        let b = OccDetector::fit(rev.view(), &c).unwrap();
        let doubled = ndarray::concatenate(Axis(0), &[x.view(), x.view()]).unwrap();
        let d = OccDetector::fit(doubled.view(), &c).unwrap();
        let q = gaussian(20, 2, 8);
        for row in q.rows() {
            let s = a.score(row);
            assert!((s - b.score(row)).abs() < 1e-12);
            assert!((s - d.score(row)).abs() < 1e-12);
        }
    }

    #[test]
    fn isf_normalizer() {
        assert_eq!(average_path_length(2), 1.0);
        assert_eq!(average_path_length(1), 0.0);
        for psi in [2, 16, 256] {
            assert_eq!(isf_anomaly_score(average_path_length(psi), psi), 0.5);
        }
        let c256 = 2.0 * (255f64.ln() + 0.5772156649015329) - 2.0 * 255.0 / 256.0;
        assert!((average_path_length(256) - c256).abs() < 1e-12);
    }

    #[test]
    fn isf_outlier_ranks_high() {
        let mut x = gaussian(80, 2, 9) * 0.3;
        for i in 40..80 {
            x[[i, 0]] += 3.0;
        }
        let outlier = array![-6.0, 6.0];
        for seed in 0..10 {
            let c = OccConfig {
                seed,
                ..OccConfig::for_detector(DetectorKind::Isf)
            };
            let det = OccDetector::fit(x.view(), &c).unwrap();
            let so = isf_score(&det, outlier.view()).unwrap();
            let scores = det.score_rows(x.view());
            assert!(scores.iter().all(|s| *s > 0.0 && *s <= 1.0));
            // a training point isolated alone at shallow depth can outrank an
            // unseen point that lands in a shared leaf, so only demand a high rank
            let below = scores.iter().filter(|s| so > **s).count();
            assert!(below >= 72, "seed {seed}: {below}");
        }
    }

    #[test]
    fn wrong_kind_accessors() {
        let x = gaussian(30, 2, 10);
        let det = OccDetector::fit(x.view(), &cfg(DetectorKind::Kde)).unwrap();
        assert!(lof_score(&det, x.row(0)).is_err());
        assert!(isf_score(&det, x.row(0)).is_err());
        assert!(kde_score(&det, x.row(0)).is_ok());
    }

    #[test]
    fn predict_boundary_rules() {
        let x = gaussian(50, 2, 11);
        let mut det = OccDetector::fit(x.view(), &cfg(DetectorKind::Isf)).unwrap();
        let s = det.score(x.row(3));
        det.set_threshold(s);
        assert_eq!(det.predict(x.row(3)), Prediction::Normal);
        det.set_threshold(f64::NEG_INFINITY);
        assert!(x
            .rows()
            .into_iter()
            .all(|r| det.predict(r) == Prediction::Anomaly));
    }

    #[test]
    fn orientation_on_shifted_fixture() {
        let ds = crate::data::synth_generate(300, 60, 4, 3.0, 12).unwrap();
        let normals = ds.matrix.slice(ndarray::s![..200, ..]);
        let test_normals = ds.matrix.slice(ndarray::s![200..300, ..]);
        let anomalies = ds.matrix.slice(ndarray::s![300.., ..]);
        for kind in DetectorKind::ALL {
            let det = OccDetector::fit(normals, &cfg(kind)).unwrap();
            let mean =
                |m: ArrayView2<f64>| det.score_rows(m).iter().sum::<f64>() / m.nrows() as f64;
            assert!(mean(anomalies) > mean(test_normals), "{kind}");
        }
    }

    #[test]
    fn scores_csv() {
        let x = gaussian(30, 2, 13);
        let det = OccDetector::fit(x.view(), &cfg(DetectorKind::Kde)).unwrap();
        let scores = det.score_rows(x.view());
        let labels = vec![false; 30];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_scores_csv(f.path(), &scores, det.threshold(), Some(&labels)).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert!(text.starts_with("row,score,predicted,label\n0,"));
    }
}
