//! Python module `aeaug`. Matrices cross the boundary as lists of rows;
//! option bundles are taken as keyword arguments and decoded with the same
//! field names and defaults as the JSON configs.

use aeaug_core::augment::{self, AugmentConfig};
use aeaug_core::autoencoder::{self as ae, AeModel, BottleneckRounding, TrainConfig};
use aeaug_core::data::NumericDataset;
use aeaug_core::experiment::{self, ExperimentConfig, ExperimentReport};
use aeaug_core::metrics::{self, ScoredSet};
use aeaug_core::occ::{self, OccConfig, Prediction};
use aeaug_core::Error;
use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<f64>>) -> Result<Array2<f64>, Error> {
    let width = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Shape(format!(
            "row {i} has {} values, expected {width}",
            rows[i].len()
        )));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, width), rows.into_iter().flatten().collect())
        .map_err(|e| Error::Shape(e.to_string()))
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn dataset(rows: Vec<Vec<f64>>) -> Result<NumericDataset, Error> {
    NumericDataset::from_matrix(to_matrix(rows)?)
}

/// Decodes keyword arguments through JSON so unknown or mistyped keys
/// surface as the same errors a config file would give.
fn from_kwargs<T: DeserializeOwned + Default>(
    py: Python<'_>,
    kwargs: Option<&Bound<'_, PyDict>>,
) -> PyResult<T> {
    let Some(kwargs) = kwargs else {
        return Ok(T::default());
    };
    let text: String = py
        .import("json")?
        .call_method1("dumps", (kwargs,))?
        .extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Standard-normal normals followed by shifted anomalies. Returns
/// `(rows, labels)`.
#[pyfunction]
#[pyo3(signature = (n_normal, n_anomaly, dim, shift, seed=0))]
fn synth_generate(
    n_normal: usize,
    n_anomaly: usize,
    dim: usize,
    shift: f64,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<bool>)> {
    let ds =
        aeaug_core::data::synth_generate(n_normal, n_anomaly, dim, shift, seed).map_err(py_err)?;
    Ok((to_rows(&ds.matrix), ds.labels.unwrap_or_default()))
}

/// Dense tanh autoencoder `n -> h -> m_b -> h -> n`.
#[pyclass(name = "Autoencoder", module = "aeaug", skip_from_py_object)]
#[derive(Clone)]
struct PyAutoencoder {
    model: AeModel,
}

#[pymethods]
impl PyAutoencoder {
    #[new]
    #[pyo3(signature = (n_features, seed=0, rounding="nearest"))]
    fn new(n_features: usize, seed: u64, rounding: &str) -> PyResult<Self> {
        let rounding = match rounding {
            "nearest" => BottleneckRounding::Nearest,
            "floor" => BottleneckRounding::Floor,
            "ceil" => BottleneckRounding::Ceil,
            other => return Err(PyValueError::new_err(format!("unknown rounding {other:?}"))),
        };
        let model = ae::build_ae_with(n_features, rounding, seed).map_err(py_err)?;
        Ok(Self { model })
    }

    #[getter]
    fn widths(&self) -> Vec<usize> {
        self.model.widths()
    }

    #[getter]
    fn bottleneck_width(&self) -> usize {
        self.model.bottleneck_width()
    }

    fn encode(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let x = to_matrix(x).map_err(py_err)?;
        let z = ae::encode_matrix(&self.model, x.view()).map_err(py_err)?;
        Ok(to_rows(&z))
    }

    fn reconstruct(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let x = to_matrix(x).map_err(py_err)?;
        let out = ae::forward(&self.model, x.view()).map_err(py_err)?;
        Ok(to_rows(&out.recon))
    }

    fn loss(&self, x: Vec<Vec<f64>>) -> PyResult<f64> {
        let x = to_matrix(x).map_err(py_err)?;
        let out = ae::forward(&self.model, x.view()).map_err(py_err)?;
        ae::smooth_l1(out.recon.view(), x.view()).map_err(py_err)
    }

    /// Trains in place and returns a dict with `harvest` (rows),
    /// `source_epochs`, `history` as `(epoch, train_loss, val_loss)` tuples
    /// and `stopped_early`. Keyword arguments are `TrainConfig` fields.
    #[pyo3(signature = (train, val=None, **kwargs))]
    fn train<'py>(
        &mut self,
        py: Python<'py>,
        train: Vec<Vec<f64>>,
        val: Option<Vec<Vec<f64>>>,
        kwargs: Option<&Bound<'py, PyDict>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg: TrainConfig = from_kwargs(py, kwargs)?;
        let width = self.model.input_width();
        let train = dataset(train).map_err(py_err)?;
        let val = match val {
            Some(v) => dataset(v).map_err(py_err)?,
            None => NumericDataset::from_matrix(Array2::zeros((0, width))).map_err(py_err)?,
        };
        let model = self.model.clone();
        let outcome = py
            .detach(|| ae::train_with_harvest(model, &train, &val, &cfg))
            .map_err(py_err)?;
        self.model = outcome.model;
        let out = PyDict::new(py);
        out.set_item("harvest", to_rows(&outcome.harvest.matrix))?;
        out.set_item("source_epochs", outcome.harvest.source_epochs)?;
        let history: Vec<(usize, f64, Option<f64>)> = outcome
            .history
            .iter()
            .map(|h| (h.epoch, h.train_loss, h.val_loss))
            .collect();
        out.set_item("history", history)?;
        out.set_item("stopped_early", outcome.stopped_early)?;
        Ok(out)
    }

    fn to_json(&self) -> PyResult<String> {
        self.model.to_json().map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            model: AeModel::from_json(text).map_err(py_err)?,
        })
    }
}

fn augment_with(
    f: fn(ndarray::ArrayView2<f64>, usize, &AugmentConfig) -> aeaug_core::Result<Array2<f64>>,
    latents: Vec<Vec<f64>>,
    n_synthetic: usize,
    cfg: AugmentConfig,
) -> PyResult<Vec<Vec<f64>>> {
    let x = to_matrix(latents).map_err(py_err)?;
    Ok(to_rows(&f(x.view(), n_synthetic, &cfg).map_err(py_err)?))
}

/// Original rows followed by `n_synthetic` SMOTE rows.
#[pyfunction]
#[pyo3(signature = (latents, n_synthetic, k_neighbors=5, seed=0))]
fn smote(
    latents: Vec<Vec<f64>>,
    n_synthetic: usize,
    k_neighbors: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = AugmentConfig {
        k_neighbors,
        seed,
        ..Default::default()
    };
    augment_with(augment::smote_n, latents, n_synthetic, cfg)
}

/// Original rows followed by `n_synthetic` ADASYN rows.
#[pyfunction]
#[pyo3(signature = (latents, n_synthetic, k_neighbors=5, seed=0))]
fn adasyn(
    latents: Vec<Vec<f64>>,
    n_synthetic: usize,
    k_neighbors: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = AugmentConfig {
        k_neighbors,
        seed,
        ..Default::default()
    };
    augment_with(augment::adasyn_n, latents, n_synthetic, cfg)
}

/// Original rows followed by `n_synthetic` Gaussian-perturbed copies.
#[pyfunction]
#[pyo3(signature = (latents, n_synthetic, sigma=0.05, seed=0))]
fn noise(
    latents: Vec<Vec<f64>>,
    n_synthetic: usize,
    sigma: f64,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = AugmentConfig {
        noise_sigma: sigma,
        seed,
        ..Default::default()
    };
    augment_with(augment::noise_augment_n, latents, n_synthetic, cfg)
}

/// A fitted LOF, KDE or isolation forest. Keyword arguments are
/// `OccConfig` fields, e.g. `OccDetector(rows, detector="kde")`.
#[pyclass(name = "OccDetector", module = "aeaug")]
struct PyOccDetector {
    inner: occ::OccDetector,
}

#[pymethods]
impl PyOccDetector {
    #[new]
    #[pyo3(signature = (train, **kwargs))]
    fn new(
        py: Python<'_>,
        train: Vec<Vec<f64>>,
        kwargs: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Self> {
        let cfg: OccConfig = from_kwargs(py, kwargs)?;
        let x = to_matrix(train).map_err(py_err)?;
        let inner = py
            .detach(|| occ::OccDetector::fit(x.view(), &cfg))
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold()
    }

    #[getter]
    fn training_scores(&self) -> Vec<f64> {
        self.inner.training_scores().to_vec()
    }

    /// Higher means more anomalous.
    fn score(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let x = to_matrix(x).map_err(py_err)?;
        if x.ncols() != self.inner.n_features() {
            return Err(PyValueError::new_err(format!(
                "expected {} features, got {}",
                self.inner.n_features(),
                x.ncols()
            )));
        }
        Ok(self.inner.score_rows(x.view()))
    }

    /// `True` where the score exceeds the threshold.
    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<bool>> {
        Ok(self
            .score(x)?
            .into_iter()
            .map(|s| self.inner.classify(s) == Prediction::Anomaly)
            .collect())
    }
}

fn scored(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<ScoredSet> {
    ScoredSet::new(scores, labels).map_err(py_err)
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    Ok(metrics::roc_auc(&scored(scores, labels)?))
}

#[pyfunction]
fn pr_auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    Ok(metrics::pr_auc(&scored(scores, labels)?))
}

#[pyfunction]
#[pyo3(signature = (values, trim_each_end=1))]
fn trimmed_mean(values: Vec<f64>, trim_each_end: usize) -> PyResult<f64> {
    metrics::trimmed_mean(&values, trim_each_end).map_err(py_err)
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Tukey boxplot summary as a dict.
#[pyfunction]
fn boxplot_stats<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &metrics::boxplot_stats(&values).map_err(py_err)?)
}

/// Two-sided signed-rank test on `a - b`, as a dict.
#[pyfunction]
#[pyo3(signature = (a, b, exact_max_n=20, min_pairs=5))]
fn wilcoxon<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    b: Vec<f64>,
    exact_max_n: usize,
    min_pairs: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = metrics::WilcoxonOptions {
        exact_max_n,
        min_pairs,
    };
    json_to_py(
        py,
        &metrics::wilcoxon_signed_rank_with(&a, &b, &opts).map_err(py_err)?,
    )
}

/// Runs an experiment described by a JSON config and returns the report as
/// JSON. With `output` set, also writes the usual result files there.
#[pyfunction]
#[pyo3(signature = (config, output=None))]
fn run_experiment(
    py: Python<'_>,
    config: &str,
    output: Option<std::path::PathBuf>,
) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config).map_err(py_err)?;
    let run = py
        .detach(|| experiment::run_experiment(&cfg))
        .map_err(py_err)?;
    if let Some(dir) = output {
        run.write(dir, true).map_err(py_err)?;
    }
    run.report.to_json().map_err(py_err)
}

/// The aggregated table for a JSON report.
#[pyfunction]
fn render_report(report: &str) -> PyResult<String> {
    let report: ExperimentReport =
        serde_json::from_str(report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(experiment::render_report(&report))
}

#[pymodule]
fn aeaug(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAutoencoder>()?;
    m.add_class::<PyOccDetector>()?;
    m.add_function(wrap_pyfunction!(synth_generate, m)?)?;
    m.add_function(wrap_pyfunction!(smote, m)?)?;
    m.add_function(wrap_pyfunction!(adasyn, m)?)?;
    m.add_function(wrap_pyfunction!(noise, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(pr_auc, m)?)?;
    m.add_function(wrap_pyfunction!(trimmed_mean, m)?)?;
    m.add_function(wrap_pyfunction!(boxplot_stats, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(render_report, m)?)?;
    Ok(())
}
