//! Repeated, paired train → calibrate → evaluate experiments.
//!
//! Run `r` uses seed `base_seed + r` for everything it draws: the synthetic data
//! (when the source is synthetic), parameter initialisation, batch order and
//! calibration SGD. All loss kinds within a run share that seed, so their
//! comparison is paired. Runs are independent and may execute in parallel; results
//! are joined in run order, which keeps reports byte-identical across schedules.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate_predict, fit_calibrator, SgdConfig};
use crate::data::{apply_minmax, fit_minmax, gen_synthetic, load_dataset, Splits, SyntheticSpec};
use crate::losses::{LossKind, SigmoidSlope};
use crate::metrics::{class_pr_curves, evaluate, precision_at_recall, ClassScores, PrPoint};
use crate::model::predict_scores;
use crate::train::{train, TrainConfig, TrainHistory, DEFAULT_HIDDEN};
use crate::{Error, Result};

/// Number of points on the recall grid used to average PR curves across runs.
pub const RECALL_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    /// Fresh splits are drawn for every run, seeded with the run seed.
    Synthetic(SyntheticSpec),
    /// Fixed CSV splits shared by all runs.
    Files { train: PathBuf, val: PathBuf, test: PathBuf },
}

/// Training settings shared by every loss kind in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub delta: SigmoidSlope,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    /// `None` uses the per-loss default (on for AUC losses, off for cross-entropy).
    pub stratified: Option<bool>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let d = TrainConfig::new(LossKind::SoftmaxCe);
        Self {
            delta: d.delta,
            epochs: d.epochs,
            batch_size: d.batch_size,
            lr_start: d.lr_start,
            lr_end: d.lr_end,
            stratified: None,
        }
    }
}

impl TrainSettings {
    pub fn config_for(&self, loss: LossKind, seed: u64) -> TrainConfig {
        let base = TrainConfig::new(loss);
        TrainConfig {
            delta: self.delta,
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr_start: self.lr_start,
            lr_end: self.lr_end,
            seed,
            stratified: self.stratified.unwrap_or(base.stratified),
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub losses: Vec<LossKind>,
    pub hidden: Vec<usize>,
    pub train: TrainSettings,
    pub calibration: SgdConfig,
    pub repeats: usize,
    pub base_seed: u64,
    /// Run repeats on the rayon pool. Does not affect results.
    #[serde(skip, default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl ExperimentConfig {
    /// The default limited-data benchmark: all three losses, 10 paired repeats.
    pub fn limited_data_benchmark(base_seed: u64) -> Self {
        Self {
            source: DataSource::Synthetic(SyntheticSpec::limited_data(base_seed)),
            losses: LossKind::ALL.to_vec(),
            hidden: DEFAULT_HIDDEN.to_vec(),
            train: TrainSettings::default(),
            calibration: SgdConfig::default(),
            repeats: 10,
            base_seed,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("repeats must be at least 1".into()));
        }
        if self.losses.is_empty() {
            return Err(Error::InvalidArgument("no loss kinds requested".into()));
        }
        for (i, l) in self.losses.iter().enumerate() {
            if self.losses[..i].contains(l) {
                return Err(Error::InvalidArgument(format!("loss {l} requested twice")));
            }
        }
        self.train.config_for(self.losses[0], 0).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Everything measured on the test split in one run for one loss kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub auc_ovo: f64,
    pub auc_ovr: f64,
    pub avg_pr_auc: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassScores>,
    pub per_class_pr_auc: Vec<f64>,
    pub warnings: Vec<String>,
    pub history: TrainHistory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub pr_auc: MeanStd,
}

/// PR curve of one class averaged over runs on a fixed recall grid. Each point
/// holds the grid recall, the mean precision and the mean threshold at which that
/// recall was first reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedPrCurve {
    pub class: usize,
    pub points: Vec<PrPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub loss: LossKind,
    pub auc_ovo: MeanStd,
    pub auc_ovr: MeanStd,
    pub avg_pr_auc: MeanStd,
    pub accuracy: MeanStd,
    pub per_class: Vec<ClassSummary>,
    pub runs: Vec<RunRecord>,
    pub pr_curves: Vec<AveragedPrCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub tool: String,
    pub version: String,
    pub base_seed: u64,
    pub repeats: usize,
    pub config: ExperimentConfig,
    pub results: Vec<LossSummary>,
}

impl ExperimentSummary {
    pub fn for_loss(&self, loss: LossKind) -> Option<&LossSummary> {
        self.results.iter().find(|r| r.loss == loss)
    }
}

/// One run's output for one loss: the record plus per-class `(threshold, precision)`
/// samples on the recall grid.
struct RunOutput {
    record: RunRecord,
    grid: Vec<Vec<(f64, f64)>>,
}

pub fn recall_grid() -> impl Iterator<Item = f64> {
    (0..RECALL_GRID_POINTS).map(|k| k as f64 / (RECALL_GRID_POINTS - 1) as f64)
}

fn load_splits(train: &Path, val: &Path, test: &Path) -> Result<Splits> {
    let (train, val, test) = (load_dataset(train)?, load_dataset(val)?, load_dataset(test)?);
    let classes = train.n_classes().max(val.n_classes()).max(test.n_classes());
    Ok(Splits {
        train: train.with_classes(classes)?,
        val: val.with_classes(classes)?,
        test: test.with_classes(classes)?,
    })
}

fn normalise(splits: &Splits) -> Result<Splits> {
    let norm = fit_minmax(&splits.train)?;
    Ok(Splits {
        train: apply_minmax(&norm, &splits.train)?,
        val: apply_minmax(&norm, &splits.val)?,
        test: apply_minmax(&norm, &splits.test)?,
    })
}

/// Trains, calibrates and evaluates one loss kind on normalised splits.
fn run_loss(
    cfg: &ExperimentConfig,
    splits: &Splits,
    loss: LossKind,
    run: usize,
    seed: u64,
) -> Result<RunOutput> {
    let classes = splits.train.n_classes();
    let mut sizes = vec![splits.train.dims()];
    sizes.extend(&cfg.hidden);
    sizes.push(classes);

    let outcome = train(&splits.train, &splits.val, &sizes, &cfg.train.config_for(loss, seed))?;
    let val_scores = predict_scores(&outcome.params, splits.val.features())?;
    let sgd = SgdConfig { seed, ..cfg.calibration };
    let calibrator = fit_calibrator(&val_scores, &splits.val.labels, &sgd)?;

    let test_scores = predict_scores(&outcome.params, splits.test.features())?;
    let pred = calibrate_predict(&calibrator, &test_scores)?;
    let report = evaluate(&test_scores, &pred, &splits.test.labels)?;
    let grid = class_pr_curves(&test_scores, &splits.test.labels)?
        .iter()
        .map(|curve| recall_grid().map(|r| precision_at_recall(curve, r)).collect())
        .collect();

    Ok(RunOutput {
        record: RunRecord {
            run,
            seed,
            auc_ovo: report.auc_ovo,
            auc_ovr: report.auc_ovr,
            avg_pr_auc: report.avg_pr_auc,
            accuracy: report.accuracy,
            per_class: report.per_class,
            per_class_pr_auc: report.per_class_pr_auc,
            warnings: report.warnings,
            history: outcome.history,
        },
        grid,
    })
}

fn run_once(cfg: &ExperimentConfig, fixed: Option<&Splits>, run: usize) -> Result<Vec<RunOutput>> {
    let seed = cfg.base_seed.wrapping_add(run as u64);
    let raw = match (&cfg.source, fixed) {
        (_, Some(s)) => s.clone(),
        (DataSource::Synthetic(spec), None) => gen_synthetic(&spec.with_seed(seed))?,
        (DataSource::Files { .. }, None) => unreachable!("file splits are loaded up front"),
    };
    let splits = normalise(&raw)?;
    cfg.losses.iter().map(|&loss| run_loss(cfg, &splits, loss, run, seed)).collect()
}

fn summarise(loss: LossKind, outputs: Vec<RunOutput>) -> LossSummary {
    let stat = |f: &dyn Fn(&RunRecord) -> f64| {
        MeanStd::of(&outputs.iter().map(|o| f(&o.record)).collect::<Vec<_>>())
    };
    let classes = outputs[0].record.per_class.len();
    let per_class = (0..classes)
        .map(|k| ClassSummary {
            precision: stat(&|r| r.per_class[k].precision),
            recall: stat(&|r| r.per_class[k].recall),
            f1: stat(&|r| r.per_class[k].f1),
            pr_auc: stat(&|r| r.per_class_pr_auc[k]),
        })
        .collect();
    let n = outputs.len() as f64;
    let pr_curves = (0..classes)
        .map(|k| AveragedPrCurve {
            class: k,
            points: recall_grid()
                .enumerate()
                .map(|(g, recall)| {
                    let (t, p) = outputs
                        .iter()
                        .map(|o| o.grid[k][g])
                        .fold((0.0, 0.0), |(ts, ps), (t, p)| (ts + t, ps + p));
                    PrPoint { threshold: t / n, recall, precision: p / n }
                })
                .collect(),
        })
        .collect();
    LossSummary {
        loss,
        auc_ovo: stat(&|r| r.auc_ovo),
        auc_ovr: stat(&|r| r.auc_ovr),
        avg_pr_auc: stat(&|r| r.avg_pr_auc),
        accuracy: stat(&|r| r.accuracy),
        per_class,
        runs: outputs.into_iter().map(|o| o.record).collect(),
        pr_curves,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let fixed = match &cfg.source {
        DataSource::Files { train, val, test } => Some(load_splits(train, val, test)?),
        DataSource::Synthetic(_) => None,
    };
    let one =
        |run: usize| run_once(cfg, fixed.as_ref(), run).map_err(|e| Error::Run { run, source: Box::new(e) });
    let runs: Vec<Vec<RunOutput>> = if cfg.parallel {
        (0..cfg.repeats).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.repeats).map(one).collect::<Result<_>>()?
    };

    let mut per_loss: Vec<Vec<RunOutput>> =
        cfg.losses.iter().map(|_| Vec::with_capacity(cfg.repeats)).collect();
    for run in runs {
        for (slot, out) in per_loss.iter_mut().zip(run) {
            slot.push(out);
        }
    }
    Ok(ExperimentSummary {
        tool: "mcauc".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        base_seed: cfg.base_seed,
        repeats: cfg.repeats,
        config: cfg.clone(),
        results: cfg.losses.iter().zip(per_loss).map(|(&l, o)| summarise(l, o)).collect(),
    })
}

pub fn report_json(summary: &ExperimentSummary) -> Result<String> {
    Ok(serde_json::to_string_pretty(summary)? + "\n")
}

/// Writes the summary as a JSON document.
pub fn emit_report(summary: &ExperimentSummary, path: &Path) -> Result<()> {
    fs::write(path, report_json(summary)?).map_err(|e| Error::io(path, e))
}

pub fn parse_report(path: &Path) -> Result<ExperimentSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `pr_points_<loss>.csv` into `dir` for every loss kind, with rows
/// `class,threshold,recall,precision`. Returns the files written.
pub fn emit_pr_points(summary: &ExperimentSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    summary
        .results
        .iter()
        .map(|res| {
            let path = dir.join(format!("pr_points_{}.csv", res.loss));
            let mut text = String::from("class,threshold,recall,precision\n");
            for curve in &res.pr_curves {
                for p in &curve.points {
                    text.push_str(&format!("{},{},{},{}\n", curve.class, p.threshold, p.recall, p.precision));
                }
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std() {
        let s = MeanStd::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[0.7]).std, 0.0);
    }

    #[test]
    fn recall_grid_spans_unit_interval() {
        let g: Vec<f64> = recall_grid().collect();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert_eq!(g[50], 0.5);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::limited_data_benchmark(0);
        cfg.repeats = 0;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = ExperimentConfig::limited_data_benchmark(0);
        cfg.losses = vec![LossKind::AaucOvo, LossKind::AaucOvo];
        assert!(run_experiment(&cfg).is_err());
    }
}
