//! Dataset ingestion and preparation: CSV loading, one-hot encoding,
//! min-max scaling to `[-1, 1]`, normal-only train/validation splits and a
//! synthetic shifted-Gaussian generator used by tests and demos.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

/// Rows of string cells as read from disk, before any encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub header: Option<Vec<String>>,
    pub column_kinds: Vec<ColumnKind>,
    pub rows: Vec<Vec<String>>,
}

impl RawDataset {
    pub fn new(
        name: impl Into<String>,
        column_kinds: Vec<ColumnKind>,
        header: Option<Vec<String>>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self> {
        let labels = column_kinds
            .iter()
            .filter(|k| **k == ColumnKind::Label)
            .count();
        if labels > 1 {
            return Err(Error::Schema(format!(
                "{labels} columns tagged as label, at most one allowed"
            )));
        }
        if let Some(h) = &header {
            if h.len() != column_kinds.len() {
                return Err(Error::Schema(format!(
                    "header has {} columns but {} column kinds were given",
                    h.len(),
                    column_kinds.len()
                )));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != column_kinds.len() {
                return Err(Error::Arity {
                    row: i,
                    found: row.len(),
                    expected: column_kinds.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            header,
            column_kinds,
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.column_kinds.len()
    }

    pub fn label_column(&self) -> Option<usize> {
        self.column_kinds
            .iter()
            .position(|k| *k == ColumnKind::Label)
    }

    pub fn column_name(&self, column: usize) -> String {
        match &self.header {
            Some(h) => h[column].clone(),
            None => format!("c{column}"),
        }
    }

    /// Keeps normal rows and anomalies whose label is one of `types`.
    ///
    /// Used to build one test set per anomaly type for multi-attack datasets.
    pub fn filter_anomaly_types(&self, rule: &LabelRule, types: &[String]) -> Result<Self> {
        let label = self
            .label_column()
            .ok_or_else(|| Error::Schema("anomaly-type filter needs a label column".into()))?;
        let rows = self
            .rows
            .iter()
            .filter(|r| !rule.is_anomaly(&r[label]) || types.iter().any(|t| *t == r[label]))
            .cloned()
            .collect();
        Ok(Self {
            rows,
            ..self.clone()
        })
    }
}

/// Loads a comma-delimited UTF-8 file. `kinds` must cover every column.
pub fn load_csv(
    path: impl AsRef<Path>,
    kinds: &[ColumnKind],
    has_header: bool,
) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = if has_header {
        let h = reader.headers().map_err(|e| Error::MalformedRow {
            row: 0,
            message: e.to_string(),
        })?;
        if h.len() != kinds.len() {
            return Err(Error::Schema(format!(
                "header has {} columns but {} column kinds were given",
                h.len(),
                kinds.len()
            )));
        }
        Some(h.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRow {
            row: i,
            message: e.to_string(),
        })?;
        if record.len() != kinds.len() {
            return Err(Error::Arity {
                row: i,
                found: record.len(),
                expected: kinds.len(),
            });
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    RawDataset::new(name, kinds.to_vec(), header, rows)
}

/// Maps label cells to the binary anomaly flag. Cells listed in
/// `normal_values` are normal; everything else is an anomaly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRule {
    pub normal_values: Vec<String>,
}

impl Default for LabelRule {
    fn default() -> Self {
        Self {
            normal_values: vec!["0".into()],
        }
    }
}

impl LabelRule {
    pub fn is_anomaly(&self, cell: &str) -> bool {
        !self.normal_values.iter().any(|v| v == cell)
    }
}

/// Numeric feature matrix with optional anomaly labels (`true` = anomaly).
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDataset {
    pub name: String,
    pub matrix: Array2<f64>,
    pub labels: Option<Vec<bool>>,
    pub feature_names: Vec<String>,
}

impl NumericDataset {
    pub fn new(
        name: impl Into<String>,
        matrix: Array2<f64>,
        labels: Option<Vec<bool>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if feature_names.len() != matrix.ncols() {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                matrix.ncols()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != matrix.nrows() {
                return Err(Error::Shape(format!(
                    "{} labels for {} rows",
                    l.len(),
                    matrix.nrows()
                )));
            }
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("matrix contains non-finite entries".into()));
        }
        Ok(Self {
            name: name.into(),
            matrix,
            labels,
            feature_names,
        })
    }

    /// Unlabelled dataset with generated feature names.
    pub fn from_matrix(matrix: Array2<f64>) -> Result<Self> {
        let names = (0..matrix.ncols()).map(|i| format!("x{i}")).collect();
        Self::new("", matrix, None, names)
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            matrix: self.matrix.select(Axis(0), indices),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Writes features followed by a final `label` column (0/1) when labelled.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = self.feature_names.clone();
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.matrix.rows().into_iter().enumerate() {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if let Some(l) = &self.labels {
                rec.push(if l[i] { "1" } else { "0" }.into());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads a file written by [`NumericDataset::save_csv`].
    pub fn load_prepared_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().from_reader(file);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        let labelled = header.last().map(|h| h == "label").unwrap_or(false);
        let n_features = header.len() - usize::from(labelled);

        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut n_rows = 0;
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Arity {
                    row: i,
                    found: rec.len(),
                    expected: header.len(),
                });
            }
            for (j, cell) in rec.iter().enumerate() {
                let v = parse_finite(cell).ok_or_else(|| Error::Unparseable {
                    row: i,
                    column: j,
                    name: header[j].clone(),
                    value: cell.to_owned(),
                })?;
                if j < n_features {
                    values.push(v);
                } else {
                    labels.push(v != 0.0);
                }
            }
            n_rows += 1;
        }
        let matrix = Array2::from_shape_vec((n_rows, n_features), values)
            .map_err(|e| Error::Shape(e.to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::new(
            name,
            matrix,
            labelled.then_some(labels),
            header[..n_features].to_vec(),
        )
    }
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Category vocabulary per categorical column, in lexicographic order.
///
/// Categories not seen while fitting encode to an all-zero block.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotEncoder {
    column_kinds: Vec<ColumnKind>,
    categories: BTreeMap<usize, Vec<String>>,
    feature_names: Vec<String>,
}

impl OneHotEncoder {
    pub fn fit(raw: &RawDataset) -> Result<Self> {
        let mut categories = BTreeMap::new();
        let mut feature_names = Vec::new();
        for (j, kind) in raw.column_kinds.iter().enumerate() {
            match kind {
                ColumnKind::Numeric => feature_names.push(raw.column_name(j)),
                ColumnKind::Categorical => {
                    let cats: BTreeSet<&str> = raw.rows.iter().map(|r| r[j].as_str()).collect();
                    if cats.is_empty() {
                        return Err(Error::InsufficientData(format!(
                            "categorical column {} has no values",
                            raw.column_name(j)
                        )));
                    }
                    let name = raw.column_name(j);
                    feature_names.extend(cats.iter().map(|c| format!("{name}={c}")));
                    categories.insert(j, cats.into_iter().map(str::to_owned).collect());
                }
                ColumnKind::Label => {}
            }
        }
        Ok(Self {
            column_kinds: raw.column_kinds.clone(),
            categories,
            feature_names,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn transform(&self, raw: &RawDataset, rule: &LabelRule) -> Result<NumericDataset> {
        if raw.column_kinds != self.column_kinds {
            return Err(Error::Schema(
                "column kinds differ from the ones the encoder was fitted on".into(),
            ));
        }
        let width = self.n_features();
        let mut matrix = Array2::zeros((raw.n_rows(), width));
        let label_col = raw.label_column();
        let mut labels = label_col.map(|_| Vec::with_capacity(raw.n_rows()));

        for (i, row) in raw.rows.iter().enumerate() {
            let mut out = 0;
            for (j, kind) in self.column_kinds.iter().enumerate() {
                match kind {
                    ColumnKind::Numeric => {
                        matrix[[i, out]] =
                            parse_finite(&row[j]).ok_or_else(|| Error::Unparseable {
                                row: i,
                                column: j,
                                name: raw.column_name(j),
                                value: row[j].clone(),
                            })?;
                        out += 1;
                    }
                    ColumnKind::Categorical => {
                        let cats = &self.categories[&j];
                        if let Ok(pos) = cats.binary_search(&row[j]) {
                            matrix[[i, out + pos]] = 1.0;
                        }
                        out += cats.len();
                    }
                    ColumnKind::Label => {
                        if let Some(l) = labels.as_mut() {
                            l.push(rule.is_anomaly(&row[j]));
                        }
                    }
                }
            }
        }
        NumericDataset::new(raw.name.clone(), matrix, labels, self.feature_names.clone())
    }
}

/// Fits the category vocabulary on `raw` itself and encodes it, with the
/// default label rule (`"0"` is normal).
pub fn one_hot_encode(raw: &RawDataset) -> Result<NumericDataset> {
    one_hot_encode_with(raw, &LabelRule::default())
}

pub fn one_hot_encode_with(raw: &RawDataset, rule: &LabelRule) -> Result<NumericDataset> {
    OneHotEncoder::fit(raw)?.transform(raw, rule)
}

/// Per-column range seen on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormParams {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let p: Self = serde_json::from_reader(file)?;
        if p.min.len() != p.max.len() || p.min.iter().zip(&p.max).any(|(lo, hi)| lo > hi) {
            return Err(Error::Schema(
                "normalization parameters are inconsistent".into(),
            ));
        }
        Ok(p)
    }
}

pub fn fit_minmax(train: &NumericDataset) -> Result<NormParams> {
    if train.n_rows() == 0 {
        return Err(Error::InsufficientData(
            "cannot fit normalization on an empty dataset".into(),
        ));
    }
    let (min, max) = train
        .matrix
        .columns()
        .into_iter()
        .map(|c| {
            c.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                })
        })
        .unzip();
    Ok(NormParams { min, max })
}

/// Maps `x` to `2 (x - min) / (max - min) - 1`. Constant columns map to 0 and
/// values outside the fitted range are extrapolated, not clipped.
pub fn apply_minmax(ds: &NumericDataset, p: &NormParams) -> Result<NumericDataset> {
    if ds.n_features() != p.min.len() {
        return Err(Error::Shape(format!(
            "dataset has {} columns, normalization has {}",
            ds.n_features(),
            p.min.len()
        )));
    }
    let mut matrix = ds.matrix.clone();
    for (j, mut col) in matrix.columns_mut().into_iter().enumerate() {
        let (lo, hi) = (p.min[j], p.max[j]);
        let range = hi - lo;
        col.mapv_inplace(|x| {
            if range > 0.0 {
                2.0 * (x - lo) / range - 1.0
            } else {
                0.0
            }
        });
    }
    Ok(NumericDataset {
        matrix,
        ..ds.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.val_fraction, self.test_fraction];
        if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("split fractions must be nonnegative".into()));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must sum to 1".into()));
        }
        Ok(())
    }
}

/// Row indices of each split part, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded partition of the normal rows; every anomaly goes to the test part.
pub fn split_indices(ds: &NumericDataset, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::Schema("splitting requires labels".into()))?;
    let mut normals: Vec<usize> = (0..ds.n_rows()).filter(|&i| !labels[i]).collect();
    if normals.is_empty() {
        return Err(Error::InsufficientData("dataset has no normal rows".into()));
    }
    let n = normals.len();
    normals.shuffle(&mut rng::seeded(spec.seed));

    let n_train = ((spec.train_fraction * n as f64).round() as usize).min(n);
    let n_val = ((spec.val_fraction * n as f64).round() as usize).min(n - n_train);
    if n_train == 0 {
        return Err(Error::InsufficientData(format!(
            "train fraction {} of {n} normal rows is empty",
            spec.train_fraction
        )));
    }

    let mut train = normals[..n_train].to_vec();
    let mut val = normals[n_train..n_train + n_val].to_vec();
    let mut test = normals[n_train + n_val..].to_vec();
    test.extend((0..ds.n_rows()).filter(|&i| labels[i]));
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, val, test })
}

pub fn split(
    ds: &NumericDataset,
    spec: &SplitSpec,
) -> Result<(NumericDataset, NumericDataset, NumericDataset)> {
    let idx = split_indices(ds, spec)?;
    Ok((
        ds.select_rows(&idx.train),
        ds.select_rows(&idx.val),
        ds.select_rows(&idx.test),
    ))
}

/// Seeded uniform subsample without replacement keeping `round(fraction * n)`
/// rows (at least one), in original order.
pub fn subsample(ds: &NumericDataset, fraction: f64, seed: u64) -> Result<NumericDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "subsample fraction {fraction} outside (0, 1]"
        )));
    }
    if fraction == 1.0 || ds.n_rows() == 0 {
        return Ok(ds.clone());
    }
    let keep = ((fraction * ds.n_rows() as f64).round() as usize).max(1);
    let mut idx: Vec<usize> = (0..ds.n_rows()).collect();
    idx.shuffle(&mut rng::seeded(seed));
    idx.truncate(keep);
    idx.sort_unstable();
    Ok(ds.select_rows(&idx))
}

/// Standard-normal normals followed by anomalies shifted by `shift` on every
/// axis.
pub fn synth_generate(
    n_normal: usize,
    n_anomaly: usize,
    dim: usize,
    shift: f64,
    seed: u64,
) -> Result<NumericDataset> {
    if dim == 0 {
        return Err(Error::Config(
            "synthetic dimension must be at least 1".into(),
        ));
    }
    let mut r = rng::seeded(seed);
    let n = n_normal + n_anomaly;
    let mut matrix = Array2::zeros((n, dim));
    for (i, mut row) in matrix.rows_mut().into_iter().enumerate() {
        let offset = if i < n_normal { 0.0 } else { shift };
        for v in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut r);
            *v = z + offset;
        }
    }
    let labels = (0..n).map(|i| i >= n_normal).collect();
    let names = (0..dim).map(|j| format!("x{j}")).collect();
    NumericDataset::new(
        format!("synthetic-shift{shift}"),
        matrix,
        Some(labels),
        names,
    )
}
