use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mcauc::data::{apply_minmax, fit_minmax, gen_synthetic, load_dataset, save_dataset, Dataset};
use mcauc::experiment::{emit_pr_points, emit_report, DataSource, TrainSettings};
use mcauc::losses::{aauc_ovo_loss, aauc_ovr_loss, softmax_ce_loss};
use mcauc::metrics::evaluate;
use mcauc::model::{
    forward, grad_check, load_model, predict_scores, save_model, GradCheckConfig, ModelDocument,
};
use mcauc::train::{batch_gradients, train, TrainConfig, DEFAULT_HIDDEN};
use mcauc::{
    calibrate_predict, fit_calibrator, run_experiment, ExperimentConfig, LabelVector, LossKind, MlpParams,
    SgdConfig, SigmoidSlope, SyntheticSpec,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Train and compare classifiers under softmax cross-entropy and
/// differentiable multiclass AUC losses.
#[derive(Parser)]
#[command(name = "mcauc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic train/val/test splits as CSV files into --out.
    GenData(GenDataArgs),
    /// Train one model, fit its calibrator on the validation split and save it to --out.
    Train(TrainArgs),
    /// Score a labelled CSV file with a saved model and print the metrics as JSON.
    Eval(EvalArgs),
    /// Repeated paired train/calibrate/evaluate runs for several losses.
    Experiment(ExperimentArgs),
    /// Compare analytic and finite-difference gradients on a random network and batch.
    GradCheck(GradCheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Three overlapping classes, 300/300/1500 examples.
    Limited,
    /// Three well separated classes, 1000/300/1500 examples.
    Separable,
}

impl Preset {
    fn spec(self, seed: u64) -> SyntheticSpec {
        match self {
            Preset::Limited => SyntheticSpec::limited_data(seed),
            Preset::Separable => SyntheticSpec::separable(seed),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct GenDataArgs {
    /// Which synthetic benchmark to draw.
    #[arg(long, value_enum, default_value = "limited")]
    preset: Preset,
    /// Seed for the generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving train.csv, val.csv and test.csv.
    #[arg(long)]
    out: PathBuf,
}

/// Optimisation settings shared by `train` and `experiment`.
#[derive(Args)]
struct TrainFlags {
    /// Sigmoid slope of the AUC surrogates.
    #[arg(long, default_value_t = mcauc::losses::DEFAULT_DELTA)]
    delta: f64,
    /// Training epochs.
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    /// Minibatch size.
    #[arg(long, default_value_t = 64)]
    batch: usize,
    /// Learning rate of the first epoch.
    #[arg(long, default_value_t = 1e-3)]
    lr_start: f64,
    /// Learning rate of the last epoch; epochs in between decay exponentially.
    #[arg(long, default_value_t = 1e-4)]
    lr_end: f64,
    /// Class-stratified minibatches. Defaults to on for AUC losses and off for cross-entropy.
    #[arg(long, value_enum)]
    stratified: Option<Switch>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HIDDEN)]
    hidden: Vec<usize>,
}

impl TrainFlags {
    fn settings(&self) -> Result<TrainSettings> {
        Ok(TrainSettings {
            delta: SigmoidSlope::new(self.delta)?,
            epochs: self.epochs,
            batch_size: self.batch,
            lr_start: self.lr_start,
            lr_end: self.lr_end,
            stratified: self.stratified.map(|s| s == Switch::On),
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training split (CSV with feature columns followed by `label`).
    #[arg(long)]
    train: PathBuf,
    /// Validation split, used for model selection and calibration.
    #[arg(long)]
    val: PathBuf,
    /// Training loss.
    #[arg(long, default_value = "aauc-ovo", value_parser = loss_parser())]
    loss: LossKind,
    /// Seed for initialisation, batching and calibration.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    flags: TrainFlags,
    /// Directory receiving model.json and history.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Model document written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Labelled CSV file to score.
    #[arg(long)]
    data: PathBuf,
    /// Also write metrics.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Synthetic benchmark used when no data files are given.
    #[arg(long, value_enum, default_value = "limited")]
    preset: Preset,
    /// Fixed training split; requires --val and --test as well.
    #[arg(long, requires_all = ["val", "test"])]
    train: Option<PathBuf>,
    /// Fixed validation split.
    #[arg(long, requires = "train")]
    val: Option<PathBuf>,
    /// Fixed test split.
    #[arg(long, requires = "train")]
    test: Option<PathBuf>,
    /// Losses to compare; repeat the flag or separate with commas. Defaults to all three.
    #[arg(long, value_delimiter = ',', value_parser = loss_parser())]
    loss: Vec<LossKind>,
    /// Number of runs; run r uses seed + r for data, initialisation and batching.
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Base seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    flags: TrainFlags,
    /// Run the repeats one after another instead of in parallel. Results are identical.
    #[arg(long)]
    serial: bool,
    /// Directory receiving report.json and pr_points_<loss>.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradCheckArgs {
    /// Loss whose gradient is checked.
    #[arg(long, default_value = "aauc-ovo", value_parser = loss_parser())]
    loss: LossKind,
    /// Sigmoid slope of the AUC surrogates.
    #[arg(long, default_value_t = mcauc::losses::DEFAULT_DELTA)]
    delta: f64,
    /// Seed for the random network and batch.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Examples in the random batch.
    #[arg(long, default_value_t = 16)]
    batch: usize,
    /// Number of classes.
    #[arg(long, default_value_t = 3)]
    classes: usize,
    /// Input features.
    #[arg(long, default_value_t = 4)]
    features: usize,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [6, 6])]
    hidden: Vec<usize>,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

fn loss_parser() -> impl TypedValueParser<Value = LossKind> {
    let names: Vec<&'static str> = LossKind::ALL.iter().map(|l| l.name()).collect();
    PossibleValuesParser::new(names).map(|s| s.parse::<LossKind>().expect("listed loss name"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
        Command::GradCheck(a) => grad_check_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Names the file for errors that do not already carry its path.
fn with_path<T>(result: mcauc::Result<T>, path: &Path) -> Result<T> {
    match result {
        Err(e @ mcauc::Error::Io { .. }) => Err(e.into()),
        other => other.with_context(|| format!("reading {}", path.display())),
    }
}

fn load(path: &Path) -> Result<Dataset> {
    with_path(load_dataset(path), path)
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let splits = gen_synthetic(&a.preset.spec(a.seed))?;
    create_dir(&a.out)?;
    for (name, data) in [("train", &splits.train), ("val", &splits.val), ("test", &splits.test)] {
        let path = a.out.join(format!("{name}.csv"));
        save_dataset(data, &path)?;
        println!("{}: {} examples", path.display(), data.len());
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let (raw_train, raw_val) = (load(&a.train)?, load(&a.val)?);
    let classes = raw_train.n_classes().max(raw_val.n_classes());
    let (raw_train, raw_val) = (raw_train.with_classes(classes)?, raw_val.with_classes(classes)?);
    let norm = fit_minmax(&raw_train)?;
    let (train_set, val_set) = (apply_minmax(&norm, &raw_train)?, apply_minmax(&norm, &raw_val)?);

    let mut sizes = vec![train_set.dims()];
    sizes.extend(&a.flags.hidden);
    sizes.push(classes);
    let config: TrainConfig = a.flags.settings()?.config_for(a.loss, a.seed);
    let outcome = train(&train_set, &val_set, &sizes, &config)?;

    let val_scores = predict_scores(&outcome.params, val_set.features())?;
    let sgd = SgdConfig { seed: a.seed, ..SgdConfig::default() };
    let calibrator = fit_calibrator(&val_scores, &val_set.labels, &sgd).context("fitting the calibrator")?;

    let model = ModelDocument {
        params: outcome.params,
        loss: Some(a.loss),
        calibrator: Some(calibrator),
        normalization: Some(norm),
    };
    create_dir(&a.out)?;
    save_model(&model, &a.out.join("model.json"))?;
    write_json(&a.out.join("history.json"), &outcome.history)?;
    let best = &outcome.history.epochs[outcome.history.best_epoch];
    println!(
        "{}: best epoch {} of {}, validation accuracy {:.4}; wrote {}",
        a.loss,
        outcome.history.best_epoch,
        outcome.history.epochs.len(),
        best.val_accuracy,
        a.out.join("model.json").display()
    );
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let model = with_path(load_model(&a.model), &a.model)?;
    let data = load(&a.data)?.with_classes(model.params.n_classes())?;
    let features = match &model.normalization {
        Some(norm) => norm.apply(data.features())?,
        None => data.features().to_owned(),
    };
    let scores = predict_scores(&model.params, features.view())?;
    let pred = match &model.calibrator {
        Some(cal) => calibrate_predict(cal, &scores)?,
        None => LabelVector::new(mcauc::argmax_rows(scores.view()))?,
    };
    let report = evaluate(&scores, &pred, &data.labels)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_json(&dir.join("metrics.json"), &report)?;
    }
    Ok(())
}

fn experiment_cmd(a: ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::limited_data_benchmark(a.seed);
    cfg.source = match (a.train, a.val, a.test) {
        (Some(train), Some(val), Some(test)) => DataSource::Files { train, val, test },
        (None, None, None) => DataSource::Synthetic(a.preset.spec(a.seed)),
        _ => bail!("--train, --val and --test must be given together"),
    };
    if !a.loss.is_empty() {
        cfg.losses = a.loss;
    }
    cfg.hidden = a.flags.hidden.clone();
    cfg.train = a.flags.settings()?;
    cfg.repeats = a.repeats;
    cfg.parallel = !a.serial;

    let summary = run_experiment(&cfg)?;
    create_dir(&a.out)?;
    let report = a.out.join("report.json");
    emit_report(&summary, &report)?;
    let pr_files = emit_pr_points(&summary, &a.out)?;

    println!("{:<10} {:>17} {:>17} {:>17} {:>17}", "loss", "auc_ovo", "auc_ovr", "avg_pr_auc", "accuracy");
    for res in &summary.results {
        let cell = |m: mcauc::experiment::MeanStd| format!("{:.4} ± {:.4}", m.mean, m.std);
        println!(
            "{:<10} {:>17} {:>17} {:>17} {:>17}",
            res.loss.name(),
            cell(res.auc_ovo),
            cell(res.auc_ovr),
            cell(res.avg_pr_auc),
            cell(res.accuracy)
        );
    }
    println!("wrote {} and {} PR point files", report.display(), pr_files.len());
    Ok(())
}

fn grad_check_cmd(a: GradCheckArgs) -> Result<()> {
    if a.classes < 2 || a.batch < a.classes {
        bail!("need at least 2 classes and a batch holding every class");
    }
    let delta = SigmoidSlope::new(a.delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut sizes = vec![a.features];
    sizes.extend(&a.hidden);
    sizes.push(a.classes);
    let params = MlpParams::init(&sizes, a.seed)?;
    let x = Array2::from_shape_fn((a.batch, a.features), |_| rng.random_range(-1.0..1.0));
    let labels = LabelVector::new(
        (0..a.batch).map(|i| if i < a.classes { i } else { rng.random_range(0..a.classes) }).collect(),
    )?;

    let (_, grads) = batch_gradients(&params, x.view(), &labels, a.loss, delta)?
        .context("batch holds fewer than two classes")?;
    let loss = |theta: &[f64]| -> mcauc::Result<f64> {
        let cache = forward(&params.with_flat(theta)?, x.view())?;
        Ok(match a.loss {
            LossKind::SoftmaxCe => softmax_ce_loss(cache.logits.view(), &labels)?.value,
            LossKind::AaucOvo => aauc_ovo_loss(&cache.scores, &labels, delta)?.value,
            LossKind::AaucOvr => aauc_ovr_loss(&cache.scores, &labels, delta)?.value,
        })
    };
    let cfg = GradCheckConfig { epsilon: a.epsilon, tolerance: a.tolerance, max_coords: None, seed: a.seed };
    let report = grad_check(loss, &params.flatten(), &grads.flatten(), &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.passed {
        bail!(
            "max relative error {:e} exceeds {:e} at parameter {}",
            report.max_rel_error,
            a.tolerance,
            report.worst_index
        );
    }
    Ok(())
}
