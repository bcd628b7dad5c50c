//! Drives the `mcauc` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn mcauc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcauc")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mcauc(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_documents_every_flag() {
    let top = ok(&["--help"]);
    for cmd in ["gen-data", "train", "eval", "experiment", "grad-check"] {
        assert!(top.contains(cmd), "{cmd} missing from --help");
    }
    let exp = ok(&["experiment", "--help"]);
    for flag in [
        "--loss",
        "--delta",
        "--epochs",
        "--batch",
        "--lr-start",
        "--lr-end",
        "--seed",
        "--repeats",
        "--stratified",
        "--out",
    ] {
        assert!(exp.contains(flag), "{flag} missing from experiment --help");
    }
    assert!(exp.contains("ce, aauc-ovo, aauc-ovr"));
    assert!(exp.contains("on, off"));
}

#[test]
fn gen_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let model = dir.path().join("model");
    ok(&["gen-data", "--preset", "separable", "--seed", "4", "--out", s(&data)]);
    for split in ["train", "val", "test"] {
        assert!(data.join(format!("{split}.csv")).exists());
    }
    let train = data.join("train.csv");
    let val = data.join("val.csv");
    ok(&["train", "--train", s(&train), "--val", s(&val), "--loss", "ce", "--seed", "1", "--out", s(&model)]);
    let model_file = model.join("model.json");
    let history: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(model.join("history.json")).unwrap()).unwrap();
    assert_eq!(history["epochs"].as_array().unwrap().len(), 20);

    let metrics_dir = dir.path().join("metrics");
    let printed = ok(&[
        "eval",
        "--model",
        s(&model_file),
        "--data",
        s(&data.join("test.csv")),
        "--out",
        s(&metrics_dir),
    ]);
    let report: serde_json::Value = serde_json::from_str(&printed).unwrap();
    assert_eq!(report["auc_ovo"], 1.0);
    assert!(report["accuracy"].as_f64().unwrap() >= 0.99);
    assert_eq!(std::fs::read_to_string(metrics_dir.join("metrics.json")).unwrap().trim(), printed.trim());
}

#[test]
fn experiment_writes_report_and_pr_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let table = ok(&[
        "experiment",
        "--repeats",
        "2",
        "--seed",
        "5",
        "--loss",
        "ce,aauc-ovo",
        "--epochs",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(table.contains("aauc-ovo") && table.contains("±"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["repeats"], 2);
    assert_eq!(report["base_seed"], 5);
    assert_eq!(report["config"]["train"]["epochs"], 3);
    for loss in ["ce", "aauc-ovo"] {
        let pr = std::fs::read_to_string(out.join(format!("pr_points_{loss}.csv"))).unwrap();
        assert!(pr.starts_with("class,threshold,recall,precision\n"));
    }
    assert!(!out.join("pr_points_aauc-ovr.csv").exists());
}

#[test]
fn experiment_is_reproducible_and_serial_matches_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["experiment", "--repeats", "2", "--epochs", "2", "--seed", "9"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&[&base[..], &["--out", s(&a)]].concat());
    ok(&[&base[..], &["--serial", "--out", s(&b)]].concat());
    for file in ["report.json", "pr_points_ce.csv", "pr_points_aauc-ovo.csv", "pr_points_aauc-ovr.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn experiment_accepts_file_splits() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["gen-data", "--seed", "2", "--out", s(&data)]);
    let out = dir.path().join("exp");
    ok(&[
        "experiment",
        "--train",
        s(&data.join("train.csv")),
        "--val",
        s(&data.join("val.csv")),
        "--test",
        s(&data.join("test.csv")),
        "--repeats",
        "1",
        "--epochs",
        "2",
        "--stratified",
        "off",
        "--out",
        s(&out),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["source"]["kind"], "files");
    assert_eq!(report["config"]["train"]["stratified"], false);
}

#[test]
fn grad_check_passes_for_every_loss() {
    for loss in ["ce", "aauc-ovo", "aauc-ovr"] {
        let out = ok(&["grad-check", "--loss", loss, "--seed", "3"]);
        let report: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["passed"], true, "{loss}");
    }
}

#[test]
fn grad_check_fails_loudly_under_an_impossible_tolerance() {
    let out = mcauc(&["grad-check", "--tolerance", "0", "--epsilon", "1e-2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let cases: [&[&str]; 5] = [
        &["train", "--train", "/no/such.csv", "--val", "/no/such.csv", "--out", "/tmp/x"],
        &["eval", "--model", "/no/model.json", "--data", "/no/data.csv"],
        &["experiment", "--loss", "hinge", "--out", "/tmp/x"],
        &["experiment", "--repeats", "0", "--out", "/tmp/x"],
        &["experiment", "--delta", "-1", "--out", "/tmp/x"],
    ];
    for args in cases {
        let out = mcauc(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}

#[test]
fn malformed_csv_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "f0,label\n0.5,0\nnope,1\n").unwrap();
    let out = mcauc(&["train", "--train", s(&bad), "--val", s(&bad), "--out", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("line 3"), "{err}");
}
