//! End-to-end experiment harness.
//!
//! One repetition: split the normal rows, scale on the training split, train
//! the autoencoder while harvesting latents, encode train and test with the
//! final model, build one training set per augmenter, fit every detector on
//! every training set, and score the test latents. Repetitions are
//! independent and reseeded from `seed + repetition`; results are merged in
//! repetition order so the report does not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{make_training_set, AugmentConfig, AugmentMethod};
use crate::autoencoder::{
    build_ae_with, encode, train_with_harvest, BottleneckRounding, LossRecord, TrainConfig,
};
use crate::data::{
    apply_minmax, fit_minmax, load_csv, one_hot_encode_with, split, subsample, synth_generate,
    ColumnKind, LabelRule, NormParams, NumericDataset, SplitSpec,
};
use crate::error::{Error, Result};
use crate::metrics::{
    boxplot_stats, pr_auc, roc_auc, trimmed_mean, wilcoxon_signed_rank, BoxplotStats, ScoredSet,
    WilcoxonResult,
};
use crate::occ::{write_scores_csv, DetectorKind, OccConfig, OccDetector};
use crate::rng;

/// Column kinds either listed in full or given by index, with every other
/// column numeric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSpec {
    List(Vec<ColumnKind>),
    Indexed {
        #[serde(default)]
        categorical: Vec<usize>,
        label: usize,
    },
}

impl ColumnSpec {
    pub fn resolve(&self, width: usize) -> Result<Vec<ColumnKind>> {
        match self {
            ColumnSpec::List(kinds) => Ok(kinds.clone()),
            ColumnSpec::Indexed { categorical, label } => {
                let mut kinds = vec![ColumnKind::Numeric; width];
                for &c in categorical.iter().chain(std::iter::once(label)) {
                    if c >= width {
                        return Err(Error::Schema(format!(
                            "column index {c} outside {width} columns"
                        )));
                    }
                }
                for &c in categorical {
                    kinds[c] = ColumnKind::Categorical;
                }
                kinds[*label] = ColumnKind::Label;
                Ok(kinds)
            }
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_normal_labels() -> Vec<String> {
    LabelRule::default().normal_values
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        columns: ColumnSpec,
        #[serde(default = "default_true")]
        has_header: bool,
        #[serde(default = "default_normal_labels")]
        normal_labels: Vec<String>,
        /// Keep only these anomaly label values (one test set per type).
        #[serde(default)]
        anomaly_types: Option<Vec<String>>,
    },
    Synthetic {
        n_normal: usize,
        n_anomaly: usize,
        dim: usize,
        shift: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            n_normal: 500,
            n_anomaly: 50,
            dim: 8,
            shift: 3.0,
            seed: 0,
        }
    }
}

fn csv_width(path: &Path, has_header: bool) -> Result<usize> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut first = csv::StringRecord::new();
    if !reader.read_record(&mut first)? {
        return Err(Error::InsufficientData(format!(
            "{} is empty{}",
            path.display(),
            if has_header { "" } else { " (no rows)" }
        )));
    }
    Ok(first.len())
}

/// Loads and one-hot encodes the configured dataset. Labels are required.
pub fn load_dataset(source: &DatasetSource) -> Result<NumericDataset> {
    let ds = match source {
        DatasetSource::Csv {
            path,
            columns,
            has_header,
            normal_labels,
            anomaly_types,
        } => {
            let kinds = columns.resolve(csv_width(path, *has_header)?)?;
            let mut raw = load_csv(path, &kinds, *has_header)?;
            let rule = LabelRule {
                normal_values: normal_labels.clone(),
            };
            if let Some(types) = anomaly_types {
                raw = raw.filter_anomaly_types(&rule, types)?;
            }
            one_hot_encode_with(&raw, &rule)?
        }
        DatasetSource::Synthetic {
            n_normal,
            n_anomaly,
            dim,
            shift,
            seed,
        } => synth_generate(*n_normal, *n_anomaly, *dim, *shift, *seed)?,
    };
    if ds.labels.is_none() {
        return Err(Error::Schema("dataset needs a label column".into()));
    }
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    /// Fractions only; the seed is derived per repetition.
    pub split: SplitSpec,
    /// Fraction of the training split kept (seeded uniform subsample).
    pub train_subsample: f64,
    /// Training settings; the seed is derived per repetition.
    pub train: TrainConfig,
    pub bottleneck_rounding: BottleneckRounding,
    pub methods: Vec<AugmentMethod>,
    /// Shared augmenter settings; the seed is derived per repetition.
    pub augment: AugmentConfig,
    /// Replaces `augment` entirely for the listed methods.
    pub augment_overrides: BTreeMap<AugmentMethod, AugmentConfig>,
    pub detectors: Vec<DetectorKind>,
    /// Shared detector settings; `detector` and `seed` are filled in per run.
    pub occ: OccConfig,
    /// Replaces `occ` entirely for the listed detectors.
    pub occ_overrides: BTreeMap<DetectorKind, OccConfig>,
    pub repetitions: usize,
    pub trim_each_end: usize,
    pub seed: u64,
    /// Where the CLI writes results when no output flag is given.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            split: SplitSpec::default(),
            train_subsample: 1.0,
            train: TrainConfig::default(),
            bottleneck_rounding: BottleneckRounding::Nearest,
            methods: AugmentMethod::ALL.to_vec(),
            augment: AugmentConfig::default(),
            augment_overrides: BTreeMap::new(),
            detectors: DetectorKind::ALL.to_vec(),
            occ: OccConfig::default(),
            occ_overrides: BTreeMap::new(),
            repetitions: 10,
            trim_each_end: 1,
            seed: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("at least one repetition is required".into()));
        }
        if self.repetitions <= 2 * self.trim_each_end {
            return Err(Error::Config(format!(
                "{} repetitions cannot be trimmed by {} at each end",
                self.repetitions, self.trim_each_end
            )));
        }
        if self.methods.is_empty() || self.detectors.is_empty() {
            return Err(Error::Config(
                "need at least one method and one detector".into(),
            ));
        }
        self.split.validate()?;
        self.train.validate()
    }

    pub fn augment_config(&self, method: AugmentMethod, seed: u64) -> AugmentConfig {
        let base = self.augment_overrides.get(&method).unwrap_or(&self.augment);
        AugmentConfig {
            method,
            seed,
            ..base.clone()
        }
    }

    pub fn occ_config(&self, detector: DetectorKind, seed: u64) -> OccConfig {
        let base = self.occ_overrides.get(&detector).unwrap_or(&self.occ);
        OccConfig {
            detector,
            seed,
            ..base.clone()
        }
    }
}

/// Seeds of every stochastic stage of one repetition, all derived from
/// `base + repetition`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionSeeds {
    pub repetition_seed: u64,
    pub split: u64,
    pub subsample: u64,
    pub ae_init: u64,
    pub training: u64,
}

impl RepetitionSeeds {
    pub fn new(base: u64, repetition: usize) -> Self {
        let s = base.wrapping_add(repetition as u64);
        Self {
            repetition_seed: s,
            split: rng::derive(s, 1),
            subsample: rng::derive(s, 2),
            ae_init: rng::derive(s, 3),
            training: rng::derive(s, 4),
        }
    }

    pub fn augment(&self, method: AugmentMethod) -> u64 {
        rng::derive(self.repetition_seed, 100 + method as u64)
    }

    pub fn detector(&self, detector: DetectorKind) -> u64 {
        rng::derive(self.repetition_seed, 200 + detector as u64)
    }
}

/// Normalized splits plus the scaling fitted on the training part.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSplits {
    pub train: NumericDataset,
    pub val: NumericDataset,
    pub test: NumericDataset,
    pub norm: NormParams,
}

pub fn prepare_splits(
    data: &NumericDataset,
    spec: &SplitSpec,
    train_subsample: f64,
    subsample_seed: u64,
) -> Result<PreparedSplits> {
    let (train, val, test) = split(data, spec)?;
    let train = subsample(&train, train_subsample, subsample_seed)?;
    let norm = fit_minmax(&train)?;
    Ok(PreparedSplits {
        train: apply_minmax(&train, &norm)?,
        val: apply_minmax(&val, &norm)?,
        test: apply_minmax(&test, &norm)?,
        norm,
    })
}

impl PreparedSplits {
    /// Writes `train.csv`, `val.csv`, `test.csv` (label last) and
    /// `norm_params.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.train.save_csv(dir.join("train.csv"))?;
        self.val.save_csv(dir.join("val.csv"))?;
        self.test.save_csv(dir.join("test.csv"))?;
        self.norm.save_json(dir.join("norm_params.json"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub dataset: String,
    pub augmenter: AugmentMethod,
    pub detector: DetectorKind,
    pub repetition: usize,
    pub pr_auc: f64,
    pub roc_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub dataset: String,
    pub augmenter: AugmentMethod,
    pub detector: DetectorKind,
    pub pr_auc_trimmed: f64,
    pub roc_auc_trimmed: f64,
}

/// Boxplot of LOF test scores for one augmenter in one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotRecord {
    pub repetition: usize,
    pub augmenter: AugmentMethod,
    pub detector: DetectorKind,
    pub stats: BoxplotStats,
}

/// Paired test of LOF test scores between the harvested-latent arm and the
/// noise arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonRecord {
    pub repetition: usize,
    pub a: AugmentMethod,
    pub b: AugmentMethod,
    pub detector: DetectorKind,
    pub result: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<RepetitionSeeds>,
    pub records: Vec<MetricRecord>,
    pub aggregated: Vec<AggregateRecord>,
    pub boxplots: Vec<BoxplotRecord>,
    pub wilcoxon: Vec<WilcoxonRecord>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }

    pub fn aggregate(
        &self,
        augmenter: AugmentMethod,
        detector: DetectorKind,
    ) -> Option<&AggregateRecord> {
        self.aggregated
            .iter()
            .find(|a| a.augmenter == augmenter && a.detector == detector)
    }
}

/// Test-set scores of one (repetition, augmenter, detector) run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDump {
    pub repetition: usize,
    pub augmenter: AugmentMethod,
    pub detector: DetectorKind,
    pub threshold: f64,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RepetitionOutput {
    pub repetition: usize,
    pub seeds: RepetitionSeeds,
    pub history: Vec<LossRecord>,
    pub test_labels: Vec<bool>,
    pub records: Vec<MetricRecord>,
    pub scores: Vec<ScoreDump>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub repetitions: Vec<RepetitionOutput>,
}

fn in_context(
    repetition: usize,
    augmenter: Option<AugmentMethod>,
    detector: Option<DetectorKind>,
) -> impl FnOnce(Error) -> Error {
    move |e| Error::Experiment {
        repetition,
        augmenter: augmenter.map(|a| a.to_string()),
        detector: detector.map(|d| d.to_string()),
        source: Box::new(e),
    }
}

/// Runs one repetition on an already loaded dataset.
pub fn run_repetition(
    cfg: &ExperimentConfig,
    data: &NumericDataset,
    repetition: usize,
) -> Result<RepetitionOutput> {
    let seeds = RepetitionSeeds::new(cfg.seed, repetition);
    let ctx = |a, d| in_context(repetition, a, d);

    let split_spec = SplitSpec {
        seed: seeds.split,
        ..cfg.split
    };
    let splits = prepare_splits(data, &split_spec, cfg.train_subsample, seeds.subsample)
        .map_err(ctx(None, None))?;
    let model = build_ae_with(
        splits.train.n_features(),
        cfg.bottleneck_rounding,
        seeds.ae_init,
    )
    .map_err(ctx(None, None))?;
    let train_cfg = TrainConfig {
        seed: seeds.training,
        ..cfg.train.clone()
    };
    let outcome = train_with_harvest(model, &splits.train, &splits.val, &train_cfg)
        .map_err(ctx(None, None))?;

    let train_latents = encode(&outcome.model, &splits.train).map_err(ctx(None, None))?;
    let test_latents = encode(&outcome.model, &splits.test).map_err(ctx(None, None))?;
    let test_labels = splits.test.labels.clone().unwrap_or_default();

    let mut records = Vec::new();
    let mut scores = Vec::new();
    for &method in &cfg.methods {
        let aug_cfg = cfg.augment_config(method, seeds.augment(method));
        let training: Array2<f64> = make_training_set(
            method,
            train_latents.view(),
            Some(&outcome.harvest),
            &aug_cfg,
        )
        .map_err(ctx(Some(method), None))?;
        for &detector in &cfg.detectors {
            let occ_cfg = cfg.occ_config(detector, seeds.detector(detector));
            let det = OccDetector::fit(training.view(), &occ_cfg)
                .map_err(ctx(Some(method), Some(detector)))?;
            let s = det.score_rows(test_latents.view());
            let scored = ScoredSet::new(s.clone(), test_labels.clone())
                .map_err(ctx(Some(method), Some(detector)))?;
            records.push(MetricRecord {
                dataset: data.name.clone(),
                augmenter: method,
                detector,
                repetition,
                pr_auc: pr_auc(&scored),
                roc_auc: roc_auc(&scored),
            });
            scores.push(ScoreDump {
                repetition,
                augmenter: method,
                detector,
                threshold: det.threshold(),
                scores: s,
            });
        }
    }
    Ok(RepetitionOutput {
        repetition,
        seeds,
        history: outcome.history,
        test_labels,
        records,
        scores,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    run_experiment_on(cfg, &data)
}

/// Like [`run_experiment`] with the dataset supplied by the caller.
pub fn run_experiment_on(cfg: &ExperimentConfig, data: &NumericDataset) -> Result<ExperimentRun> {
    cfg.validate()?;
    let outputs: Vec<RepetitionOutput> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(cfg, data, r))
        .collect::<Result<Vec<_>>>()?;

    let records: Vec<MetricRecord> = outputs.iter().flat_map(|o| o.records.clone()).collect();

    let mut aggregated = Vec::new();
    for &augmenter in &cfg.methods {
        for &detector in &cfg.detectors {
            let (pr, roc): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.augmenter == augmenter && r.detector == detector)
                .map(|r| (r.pr_auc, r.roc_auc))
                .unzip();
            aggregated.push(AggregateRecord {
                dataset: data.name.clone(),
                augmenter,
                detector,
                pr_auc_trimmed: trimmed_mean(&pr, cfg.trim_each_end)?,
                roc_auc_trimmed: trimmed_mean(&roc, cfg.trim_each_end)?,
            });
        }
    }

    let mut boxplots = Vec::new();
    let mut wilcoxon = Vec::new();
    for o in &outputs {
        let lof = |m: AugmentMethod| {
            o.scores
                .iter()
                .find(|s| s.augmenter == m && s.detector == DetectorKind::Lof)
        };
        for &augmenter in &cfg.methods {
            if let Some(dump) = lof(augmenter) {
                boxplots.push(BoxplotRecord {
                    repetition: o.repetition,
                    augmenter,
                    detector: DetectorKind::Lof,
                    stats: boxplot_stats(&dump.scores).map_err(in_context(
                        o.repetition,
                        Some(augmenter),
                        Some(DetectorKind::Lof),
                    ))?,
                });
            }
        }
        if let (Some(a), Some(b)) = (lof(AugmentMethod::AeEpochs), lof(AugmentMethod::Noise)) {
            // identical score vectors have no test; skip rather than fail
            if let Ok(result) = wilcoxon_signed_rank(&a.scores, &b.scores) {
                wilcoxon.push(WilcoxonRecord {
                    repetition: o.repetition,
                    a: AugmentMethod::AeEpochs,
                    b: AugmentMethod::Noise,
                    detector: DetectorKind::Lof,
                    result,
                });
            }
        }
    }

    let report = ExperimentReport {
        dataset: data.name.clone(),
        config: cfg.clone(),
        seeds: outputs.iter().map(|o| o.seeds).collect(),
        records,
        aggregated,
        boxplots,
        wilcoxon,
    };
    Ok(ExperimentRun {
        report,
        repetitions: outputs,
    })
}

impl ExperimentRun {
    /// Writes `report.json`, `boxplot.json`, `loss_history.csv` and one
    /// `scores/rep{r}_{augmenter}_{detector}.csv` per run.
    pub fn write(&self, dir: impl AsRef<Path>, with_scores: bool) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let report_path = dir.join("report.json");
        std::fs::write(&report_path, self.report.to_json()?)
            .map_err(|e| Error::io(&report_path, e))?;
        let box_path = dir.join("boxplot.json");
        std::fs::write(
            &box_path,
            serde_json::to_string_pretty(&self.report.boxplots)?,
        )
        .map_err(|e| Error::io(&box_path, e))?;

        let loss_path = dir.join("loss_history.csv");
        let file = File::create(&loss_path).map_err(|e| Error::io(&loss_path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["repetition", "epoch", "train_loss", "val_loss"])?;
        for o in &self.repetitions {
            for h in &o.history {
                w.write_record([
                    o.repetition.to_string(),
                    h.epoch.to_string(),
                    h.train_loss.to_string(),
                    h.val_loss.map(|v| v.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&loss_path, e))?;

        if with_scores {
            let scores_dir = dir.join("scores");
            std::fs::create_dir_all(&scores_dir).map_err(|e| Error::io(&scores_dir, e))?;
            for o in &self.repetitions {
                for s in &o.scores {
                    let name = format!("rep{:02}_{}_{}.csv", s.repetition, s.augmenter, s.detector);
                    write_scores_csv(
                        scores_dir.join(name),
                        &s.scores,
                        s.threshold,
                        Some(&o.test_labels),
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Renders the aggregated grid, one row per (augmenter, detector). The best
/// value of each metric column is marked with `*`; ties are all marked.
pub fn render_report(report: &ExperimentReport) -> String {
    let best = |f: fn(&AggregateRecord) -> f64| {
        report
            .aggregated
            .iter()
            .map(f)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let best_pr = best(|a| a.pr_auc_trimmed);
    let best_roc = best(|a| a.roc_auc_trimmed);
    let mark = |v: f64, b: f64| if v == b { "*" } else { " " };

    let mut out = String::new();
    let _ = writeln!(out, "dataset: {}", report.dataset);
    let _ = writeln!(
        out,
        "{:<10} {:<8} {:>9} {:>9}",
        "augmenter", "detector", "PR AUC", "ROC AUC"
    );
    for a in &report.aggregated {
        let _ = writeln!(
            out,
            "{:<10} {:<8} {:>8.4}{} {:>8.4}{}",
            a.augmenter.name(),
            a.detector.name(),
            a.pr_auc_trimmed,
            mark(a.pr_auc_trimmed, best_pr),
            a.roc_auc_trimmed,
            mark(a.roc_auc_trimmed, best_roc),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            dataset: DatasetSource::Synthetic {
                n_normal: 120,
                n_anomaly: 15,
                dim: 5,
                shift: 3.0,
                seed: 1,
            },
            train: TrainConfig {
                n_epochs: 12,
                ..Default::default()
            },
            occ: OccConfig {
                lof_k: 10,
                ..Default::default()
            },
            repetitions: 3,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn record_count_and_aggregates() {
        let run = run_experiment(&small_config()).unwrap();
        assert_eq!(run.report.records.len(), 5 * 3 * 3);
        assert_eq!(run.report.aggregated.len(), 15);
        assert_eq!(run.report.boxplots.len(), 5 * 3);
        assert_eq!(run.report.seeds.len(), 3);
        for r in &run.report.records {
            assert!((0.0..=1.0).contains(&r.pr_auc) && (0.0..=1.0).contains(&r.roc_auc));
        }
    }

    #[test]
    fn filters_restrict_grid() {
        let cfg = ExperimentConfig {
            methods: vec![AugmentMethod::AeEpochs],
            detectors: vec![DetectorKind::Kde],
            ..small_config()
        };
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.report.records.len(), 3);
        assert!(run.report.boxplots.is_empty());
        let table = render_report(&run.report);
        assert_eq!(table.lines().count(), 3);
        assert_eq!(table.matches('*').count(), 2);
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig {
            repetitions: 2,
            ..small_config()
        };
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
        let cfg = ExperimentConfig {
            detectors: vec![],
            ..small_config()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn errors_carry_context() {
        let cfg = ExperimentConfig {
            occ: OccConfig {
                lof_k: 500,
                ..Default::default()
            },
            methods: vec![AugmentMethod::None],
            ..small_config()
        };
        match run_experiment(&cfg).unwrap_err() {
            Error::Experiment {
                repetition,
                augmenter,
                detector,
                ..
            } => {
                assert_eq!(repetition, 0);
                assert_eq!(augmenter.as_deref(), Some("none"));
                assert_eq!(detector.as_deref(), Some("lof"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn config_json_defaults_and_overrides() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "dataset": {"kind": "synthetic", "n_normal": 10, "n_anomaly": 2, "dim": 3, "shift": 1.0},
                "augment_overrides": {"noise": {"noise_sigma": 0.2}},
                "occ_overrides": {"kde": {"kde_bandwidth": {"fixed": 0.5}}}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.repetitions, 10);
        assert_eq!(cfg.train.nu, 0.25);
        assert_eq!(cfg.occ.lof_k, 20);
        assert_eq!(cfg.occ.isf_trees, 20);
        assert_eq!(cfg.occ.contamination, 0.1);
        assert_eq!(cfg.augment_config(AugmentMethod::Noise, 1).noise_sigma, 0.2);
        assert_eq!(
            cfg.augment_config(AugmentMethod::Smote, 1).noise_sigma,
            0.05
        );
        assert_eq!(
            cfg.occ_config(DetectorKind::Kde, 0).kde_bandwidth,
            crate::occ::Bandwidth::Fixed(0.5)
        );
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn column_spec_resolution() {
        let spec: ColumnSpec = serde_json::from_str(r#"{"categorical": [1], "label": 3}"#).unwrap();
        assert_eq!(
            spec.resolve(4).unwrap(),
            vec![
                ColumnKind::Numeric,
                ColumnKind::Categorical,
                ColumnKind::Numeric,
                ColumnKind::Label
            ]
        );
        assert!(spec.resolve(3).is_err());
        let list: ColumnSpec = serde_json::from_str(r#"["numeric", "label"]"#).unwrap();
        assert_eq!(
            list.resolve(99).unwrap(),
            vec![ColumnKind::Numeric, ColumnKind::Label]
        );
    }
}
