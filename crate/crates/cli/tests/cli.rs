use std::path::Path;
use std::process::{Command, Output};

fn aeaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aeaug"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, dataset: serde_json::Value) -> String {
    let cfg = serde_json::json!({
        "dataset": dataset,
        "train": {"n_epochs": 6},
        "occ": {"lof_k": 5},
        "repetitions": 3,
        "seed": 1
    });
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

fn synthetic() -> serde_json::Value {
    serde_json::json!({"kind": "synthetic", "n_normal": 80, "n_anomaly": 8, "dim": 3, "shift": 2.0})
}

#[test]
fn missing_dataset_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({"kind": "csv", "path": "/no/such/file.csv", "columns": {"label": 0}}),
    );
    let out = aeaug(&[
        "prepare",
        "--config",
        &cfg,
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("/no/such/file.csv"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_config_fails() {
    let out = aeaug(&[
        "run",
        "--config",
        "/no/such/config.json",
        "--output",
        "/tmp/x",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn prepare_puts_label_last() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let mut body = String::from("class,a,b,kind\n");
    for i in 0..40 {
        let class = if i % 8 == 0 { "attack" } else { "0" };
        body.push_str(&format!("{class},{},{},{}\n", i, 40 - i, ["x", "y"][i % 2]));
    }
    std::fs::write(&csv, body).unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({"kind": "csv", "path": csv, "columns": {"categorical": [3], "label": 0}}),
    );
    let out_dir = dir.path().join("prepared");
    let out = aeaug(&[
        "prepare",
        "--config",
        &cfg,
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for split in ["train", "val", "test"] {
        let text = std::fs::read_to_string(out_dir.join(format!("{split}.csv"))).unwrap();
        assert_eq!(text.lines().next().unwrap(), "a,b,kind=x,kind=y,label");
    }
    assert!(out_dir.join("norm_params.json").exists());
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), synthetic());
    let out_dir = dir.path().join("out");
    let out = aeaug(&[
        "run",
        "--config",
        &cfg,
        "--output",
        out_dir.to_str().unwrap(),
        "--methods",
        "none,ae_epochs",
        "--detectors",
        "kde",
        "--repetitions",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 4);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 2 * 3);

    let again = aeaug(&["report", out_dir.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(stdout(&again), table);
    let by_file = aeaug(&["report", out_dir.join("report.json").to_str().unwrap()]);
    assert_eq!(stdout(&by_file), table);
}

#[test]
fn one_cell_report_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), synthetic());
    let out = aeaug(&[
        "run",
        "--config",
        &cfg,
        "--output",
        dir.path().join("o").to_str().unwrap(),
        "--methods",
        "none",
        "--detectors",
        "isf",
        "--no-scores",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    let rows: Vec<&str> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].matches('*').count(), 2);
    assert!(!dir.path().join("o/scores").exists());
}

#[test]
fn malformed_report_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    std::fs::write(&path, "{\"records\": 3}").unwrap();
    let out = aeaug(&["report", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!stderr(&out).is_empty());
}

#[test]
fn unknown_method_is_rejected() {
    let out = aeaug(&["run", "--config", "c.json", "--methods", "gan"]);
    assert!(!out.status.success());
}

#[test]
fn output_comes_from_config_when_flag_absent() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("from_config");
    let cfg = serde_json::json!({
        "dataset": synthetic(),
        "train": {"n_epochs": 4},
        "occ": {"lof_k": 5},
        "methods": ["none"],
        "detectors": ["kde"],
        "repetitions": 3,
        "output": out_dir
    });
    let path = dir.path().join("c.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let out = aeaug(&["run", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("report.json").exists());

    std::fs::write(
        &path,
        serde_json::json!({"dataset": synthetic()}).to_string(),
    )
    .unwrap();
    let out = aeaug(&["run", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("output"));
}
