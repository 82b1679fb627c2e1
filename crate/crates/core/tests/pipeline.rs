mod common;

use std::io::Write;

use aeaug_core::augment::AugmentMethod;
use aeaug_core::autoencoder::{build_ae_with, encode, train_with_harvest, TrainConfig};
use aeaug_core::data::{synth_generate, NumericDataset, SplitSpec};
use aeaug_core::experiment::{
    load_dataset, prepare_splits, render_report, run_experiment, run_experiment_on, run_repetition,
    ColumnSpec, DatasetSource, ExperimentConfig, ExperimentReport, RepetitionSeeds,
};
use aeaug_core::occ::{DetectorKind, OccConfig, OccDetector};
use aeaug_core::Error;

fn quick(data: DatasetSource) -> ExperimentConfig {
    ExperimentConfig {
        dataset: data,
        train: TrainConfig {
            n_epochs: 8,
            ..Default::default()
        },
        occ: OccConfig {
            lof_k: 5,
            ..Default::default()
        },
        repetitions: 3,
        seed: 11,
        ..Default::default()
    }
}

fn synthetic(n_normal: usize, n_anomaly: usize) -> DatasetSource {
    DatasetSource::Synthetic {
        n_normal,
        n_anomaly,
        dim: 4,
        shift: 2.5,
        seed: 3,
    }
}

#[test]
fn none_arm_is_the_plain_pipeline() {
    let cfg = quick(synthetic(120, 12));
    let data = load_dataset(&cfg.dataset).unwrap();
    let out = run_repetition(&cfg, &data, 1).unwrap();

    let seeds = RepetitionSeeds::new(cfg.seed, 1);
    let spec = SplitSpec {
        seed: seeds.split,
        ..cfg.split
    };
    let splits = prepare_splits(&data, &spec, cfg.train_subsample, seeds.subsample).unwrap();
    let model = build_ae_with(4, cfg.bottleneck_rounding, seeds.ae_init).unwrap();
    let train_cfg = TrainConfig {
        seed: seeds.training,
        ..cfg.train.clone()
    };
    let trained = train_with_harvest(model, &splits.train, &splits.val, &train_cfg).unwrap();
    let train_z = encode(&trained.model, &splits.train).unwrap();
    let test_z = encode(&trained.model, &splits.test).unwrap();

    for d in DetectorKind::ALL {
        let det = OccDetector::fit(train_z.view(), &cfg.occ_config(d, seeds.detector(d))).unwrap();
        let direct = det.score_rows(test_z.view());
        let dump = out
            .scores
            .iter()
            .find(|s| s.augmenter == AugmentMethod::None && s.detector == d)
            .unwrap();
        assert_eq!(dump.scores, direct, "{d}");
        assert_eq!(dump.threshold, det.threshold());
    }
}

#[test]
fn prepared_files_match_memory() {
    let data = synth_generate(60, 6, 3, 2.0, 8).unwrap();
    let spec = SplitSpec {
        seed: 4,
        ..Default::default()
    };
    let splits = prepare_splits(&data, &spec, 1.0, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    splits.write(dir.path()).unwrap();
    for (name, ds) in [
        ("train", &splits.train),
        ("val", &splits.val),
        ("test", &splits.test),
    ] {
        let path = dir.path().join(format!("{name}.csv"));
        let header = std::fs::read_to_string(&path).unwrap();
        assert_eq!(header.lines().next().unwrap(), "x0,x1,x2,label");
        let back = NumericDataset::load_prepared_csv(&path).unwrap();
        assert_eq!(back.matrix, ds.matrix);
        assert_eq!(back.labels, ds.labels);
    }
    let norm =
        aeaug_core::data::NormParams::load_json(dir.path().join("norm_params.json")).unwrap();
    assert_eq!(norm, splits.norm);
    assert!(splits.train.matrix.iter().all(|v| (-1.0..=1.0).contains(v)));
}

#[test]
fn csv_dataset_with_categories_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flows.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "duration,proto,bytes,class").unwrap();
    let protos = ["tcp", "udp", "icmp"];
    for i in 0..150 {
        let anomalous = i % 10 == 0;
        let (dur, bytes, class) = if anomalous {
            (
                50.0 + i as f64,
                9000.0 - i as f64,
                if i % 20 == 0 { "dos" } else { "probe" },
            )
        } else {
            ((i % 7) as f64, 100.0 + (i % 13) as f64 * 3.0, "normal")
        };
        writeln!(f, "{dur},{},{bytes},{class}", protos[i % 3]).unwrap();
    }
    drop(f);

    let source = DatasetSource::Csv {
        path: path.clone(),
        columns: ColumnSpec::Indexed {
            categorical: vec![1],
            label: 3,
        },
        has_header: true,
        normal_labels: vec!["normal".into()],
        anomaly_types: None,
    };
    let data = load_dataset(&source).unwrap();
    assert_eq!(data.n_features(), 5);
    assert_eq!(
        data.labels.as_ref().unwrap().iter().filter(|l| **l).count(),
        15
    );

    let only_dos = DatasetSource::Csv {
        path,
        columns: ColumnSpec::Indexed {
            categorical: vec![1],
            label: 3,
        },
        has_header: true,
        normal_labels: vec!["normal".into()],
        anomaly_types: Some(vec!["dos".into()]),
    };
    let dos = load_dataset(&only_dos).unwrap();
    assert_eq!(
        dos.labels.as_ref().unwrap().iter().filter(|l| **l).count(),
        8
    );

    let run = run_experiment(&quick(source)).unwrap();
    assert_eq!(run.report.records.len(), 5 * 3 * 3);
    assert_eq!(run.report.dataset, "flows");
}

#[test]
fn written_outputs() {
    let cfg = quick(synthetic(100, 10));
    let run = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run.write(dir.path(), true).unwrap();

    let report = ExperimentReport::load(dir.path().join("report.json")).unwrap();
    assert_eq!(report, run.report);

    let scores: Vec<_> = std::fs::read_dir(dir.path().join("scores"))
        .unwrap()
        .collect();
    assert_eq!(scores.len(), 5 * 3 * 3);
    let one = std::fs::read_to_string(dir.path().join("scores/rep00_ae_epochs_lof.csv")).unwrap();
    assert_eq!(one.lines().next().unwrap(), "row,score,predicted,label");
    assert_eq!(
        one.lines().count(),
        1 + run.repetitions[0].test_labels.len()
    );

    let loss = std::fs::read_to_string(dir.path().join("loss_history.csv")).unwrap();
    assert_eq!(
        loss.lines().next().unwrap(),
        "repetition,epoch,train_loss,val_loss"
    );
    let boxplots: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("boxplot.json")).unwrap())
            .unwrap();
    assert_eq!(boxplots.as_array().unwrap().len(), 5 * 3);

    // every aggregated value survives the render
    let table = render_report(&report);
    for a in &report.aggregated {
        assert!(table.contains(&format!("{:.4}", a.pr_auc_trimmed)));
        assert!(table.contains(&format!("{:.4}", a.roc_auc_trimmed)));
    }
}

#[test]
fn record_fields_and_trimmed_means() {
    let cfg = ExperimentConfig {
        repetitions: 4,
        ..quick(synthetic(100, 10))
    };
    let data = load_dataset(&cfg.dataset).unwrap();
    let run = run_experiment_on(&cfg, &data).unwrap();
    for agg in &run.report.aggregated {
        let mut pr: Vec<f64> = run
            .report
            .records
            .iter()
            .filter(|r| r.augmenter == agg.augmenter && r.detector == agg.detector)
            .map(|r| r.pr_auc)
            .collect();
        pr.sort_by(f64::total_cmp);
        let middle = (pr[1] + pr[2]) / 2.0;
        assert!((agg.pr_auc_trimmed - middle).abs() < 1e-15);
    }
    let reps: Vec<usize> = run.report.records.iter().map(|r| r.repetition).collect();
    let mut sorted = reps.clone();
    sorted.sort();
    assert_eq!(reps, sorted, "records are merged in repetition order");
}

#[test]
fn seeds_differ_across_repetitions() {
    let a = RepetitionSeeds::new(5, 0);
    let b = RepetitionSeeds::new(5, 1);
    assert_ne!(a.split, b.split);
    assert_ne!(a.ae_init, b.ae_init);
    assert_eq!(
        RepetitionSeeds::new(4, 1),
        a,
        "seed_r depends on seed + r only"
    );
    assert_ne!(
        a.augment(AugmentMethod::Smote),
        a.augment(AugmentMethod::Adasyn)
    );
}

#[test]
fn missing_dataset_is_an_io_error() {
    let source = DatasetSource::Csv {
        path: "/nonexistent/data.csv".into(),
        columns: ColumnSpec::Indexed {
            categorical: vec![],
            label: 0,
        },
        has_header: true,
        normal_labels: vec!["0".into()],
        anomaly_types: None,
    };
    assert!(matches!(
        run_experiment(&quick(source)),
        Err(Error::Io { .. })
    ));
}

#[test]
fn unlabelled_source_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "a,b\n1,2\n3,4\n").unwrap();
    let source = DatasetSource::Csv {
        path,
        columns: ColumnSpec::List(vec![
            aeaug_core::data::ColumnKind::Numeric,
            aeaug_core::data::ColumnKind::Numeric,
        ]),
        has_header: true,
        normal_labels: vec!["0".into()],
        anomaly_types: None,
    };
    assert!(matches!(load_dataset(&source), Err(Error::Schema(_))));
}
