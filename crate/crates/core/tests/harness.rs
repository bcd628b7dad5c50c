//! End-to-end experiment runs through the public harness API.

use mcauc::data::{gen_synthetic, save_dataset};
use mcauc::experiment::{emit_pr_points, emit_report, parse_report, DataSource, RECALL_GRID_POINTS};
use mcauc::{run_experiment, Error, ExperimentConfig, LossKind, SyntheticSpec};

fn separable_config(repeats: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::limited_data_benchmark(21);
    cfg.source = DataSource::Synthetic(SyntheticSpec::separable(21));
    cfg.repeats = repeats;
    cfg
}

#[test]
fn separable_single_run_is_perfect_with_zero_spread() {
    let summary = run_experiment(&separable_config(1)).unwrap();
    for res in &summary.results {
        for stat in [res.auc_ovo, res.auc_ovr, res.avg_pr_auc, res.accuracy] {
            assert_eq!((stat.mean, stat.std), (1.0, 0.0), "{}", res.loss);
        }
    }
}

#[test]
fn perfect_classifier_pr_rows_have_unit_precision() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&separable_config(2)).unwrap();
    let files = emit_pr_points(&summary, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("class,threshold,recall,precision"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 3 * RECALL_GRID_POINTS);
        for row in rows {
            let precision: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(precision, 1.0, "{}: {row}", path.display());
        }
    }
}

#[test]
fn report_records_repeats_and_base_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::limited_data_benchmark(42);
    cfg.repeats = 2;
    cfg.losses = vec![LossKind::SoftmaxCe, LossKind::AaucOvo];
    let summary = run_experiment(&cfg).unwrap();
    let path = dir.path().join("report.json");
    emit_report(&summary, &path).unwrap();

    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["repeats"], 2);
    assert_eq!(doc["base_seed"], 42);
    assert_eq!(doc["results"].as_array().unwrap().len(), 2);
    let runs = doc["results"][0]["runs"].as_array().unwrap();
    assert_eq!(runs[1]["seed"], 43);
    assert_eq!(parse_report(&path).unwrap(), summary);
}

#[test]
fn losses_are_paired_on_the_same_data() {
    let mut cfg = ExperimentConfig::limited_data_benchmark(8);
    cfg.repeats = 2;
    let summary = run_experiment(&cfg).unwrap();
    for k in 0..2 {
        let seeds: Vec<u64> = summary.results.iter().map(|r| r.runs[k].seed).collect();
        assert!(seeds.iter().all(|&s| s == 8 + k as u64));
    }
}

#[test]
fn file_splits_match_the_generated_run() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec::limited_data(30);
    let splits = gen_synthetic(&spec).unwrap();
    let paths: Vec<_> =
        ["train", "val", "test"].iter().map(|n| dir.path().join(format!("{n}.csv"))).collect();
    for (data, path) in [&splits.train, &splits.val, &splits.test].into_iter().zip(&paths) {
        save_dataset(data, path).unwrap();
    }

    let mut synthetic = ExperimentConfig::limited_data_benchmark(30);
    synthetic.repeats = 1;
    let mut files = synthetic.clone();
    files.source =
        DataSource::Files { train: paths[0].clone(), val: paths[1].clone(), test: paths[2].clone() };
    let (a, b) = (run_experiment(&synthetic).unwrap(), run_experiment(&files).unwrap());
    assert_eq!(a.results, b.results);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = ExperimentConfig::limited_data_benchmark(0);
    cfg.repeats = 0;
    assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument(_))));
    let mut cfg = ExperimentConfig::limited_data_benchmark(0);
    cfg.losses = vec![LossKind::AaucOvo, LossKind::AaucOvo];
    assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument(_))));
}

#[test]
fn missing_data_files_surface_the_path() {
    let mut cfg = ExperimentConfig::limited_data_benchmark(0);
    cfg.source = DataSource::Files {
        train: "/nonexistent/train.csv".into(),
        val: "/nonexistent/val.csv".into(),
        test: "/nonexistent/test.csv".into(),
    };
    let err = run_experiment(&cfg).unwrap_err();
    let mut msg = err.to_string();
    let mut cause = std::error::Error::source(&err);
    while let Some(e) = cause {
        msg = format!("{msg}: {e}");
        cause = e.source();
    }
    assert!(matches!(err, Error::Io { .. }), "{msg}");
    assert!(msg.contains("/nonexistent/train.csv") && msg.contains("No such file"), "{msg}");
}
