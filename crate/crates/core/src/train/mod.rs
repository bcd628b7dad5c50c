//! Training: learning-rate schedule, Adam, minibatching and the epoch loop.

mod adam;
mod batches;

pub use adam::AdamState;
pub use batches::make_batches;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::losses::{aauc_ovo_loss, aauc_ovr_loss, softmax_ce_loss, LossKind, SigmoidSlope};
use crate::model::{backward, backward_logits, forward, predict_scores, Gradients, MlpParams};
use crate::{argmax_rows, Error, LabelVector, Result};

pub const DEFAULT_HIDDEN: [usize; 2] = [32, 32];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub delta: SigmoidSlope,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl TrainConfig {
    /// 20 epochs, batches of 64, learning rate decaying 1e-3 → 1e-4, δ = 10.
    /// Stratified batching is on for the AUC losses and off for cross-entropy.
    pub fn new(loss: LossKind) -> Self {
        Self {
            loss,
            delta: SigmoidSlope::default(),
            epochs: 20,
            batch_size: 64,
            lr_start: 1e-3,
            lr_end: 1e-4,
            seed: 0,
            stratified: loss.is_auc(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument("batch size must be at least 2".into()));
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end && self.lr_start.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rates must satisfy lr_start >= lr_end > 0, got {} and {}",
                self.lr_start, self.lr_end
            )));
        }
        Ok(())
    }
}

/// Geometric interpolation from `lr_start` at epoch 0 to `lr_end` at the last epoch.
pub fn lr_at_epoch(config: &TrainConfig, epoch: usize) -> Result<f64> {
    if epoch >= config.epochs {
        return Err(Error::InvalidArgument(format!(
            "epoch {epoch} out of range for {} epochs",
            config.epochs
        )));
    }
    if config.epochs == 1 {
        return Ok(config.lr_start);
    }
    let t = epoch as f64 / (config.epochs - 1) as f64;
    // Written as a weighted geometric mean so both endpoints come out exact.
    Ok(config.lr_start.powf(1.0 - t) * config.lr_end.powf(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub lr: f64,
    /// Mean loss over the batches that produced an update.
    pub train_loss: f64,
    pub val_accuracy: f64,
    pub batches: usize,
    /// Batches with fewer than two classes, which the AUC losses cannot use.
    pub skipped_batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub history: TrainHistory,
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(epoch as u64 + 1)
}

/// Loss value and parameter gradients on one batch; `None` for a degenerate batch.
pub fn batch_gradients(
    params: &MlpParams,
    features: ndarray::ArrayView2<'_, f64>,
    labels: &LabelVector,
    loss: LossKind,
    delta: SigmoidSlope,
) -> Result<Option<(f64, Gradients)>> {
    let cache = forward(params, features)?;
    let out = match loss {
        LossKind::SoftmaxCe => {
            let l = softmax_ce_loss(cache.logits.view(), labels)?;
            return Ok(Some((l.value, backward_logits(params, &cache, l.grad.view())?)));
        }
        LossKind::AaucOvo => aauc_ovo_loss(&cache.scores, labels, delta),
        LossKind::AaucOvr => aauc_ovr_loss(&cache.scores, labels, delta),
    };
    match out {
        Ok(l) => Ok(Some((l.value, backward(params, &cache, l.grad.view())?))),
        Err(Error::DegenerateBatch { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Fraction of rows whose softmax argmax equals the label.
pub fn accuracy(params: &MlpParams, data: &Dataset) -> Result<f64> {
    let scores = predict_scores(params, data.features())?;
    let pred = argmax_rows(scores.view());
    let hits = pred.iter().zip(data.labels.as_slice()).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / data.len() as f64)
}

/// Runs the full protocol and returns the parameters of the epoch with the best
/// validation accuracy (earliest epoch on ties).
pub fn train(
    train_set: &Dataset,
    val_set: &Dataset,
    layer_sizes: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let classes = *layer_sizes.last().unwrap_or(&0);
    if layer_sizes.first() != Some(&train_set.dims()) || val_set.dims() != train_set.dims() {
        return Err(Error::Shape(format!(
            "layer sizes {layer_sizes:?} do not fit {}-feature data (validation has {})",
            train_set.dims(),
            val_set.dims()
        )));
    }
    train_set.labels.check_against(train_set.len(), classes)?;
    val_set.labels.check_against(val_set.len(), classes)?;
    train_set.labels.require_all_present(classes)?;

    let mut params = MlpParams::init(layer_sizes, config.seed)?;
    let mut adam = AdamState::new(&params);
    let mut best: Option<(f64, MlpParams)> = None;
    let mut records = Vec::with_capacity(config.epochs);
    let mut best_epoch = 0;

    for epoch in 0..config.epochs {
        let lr = lr_at_epoch(config, epoch)?;
        let batches = make_batches(
            &train_set.labels,
            config.batch_size.min(train_set.len()),
            epoch_seed(config.seed, epoch),
            config.stratified,
        )?;
        let (mut loss_sum, mut used, mut skipped) = (0.0, 0usize, 0usize);
        for rows in &batches {
            let (x, y) = train_set.select(rows);
            match batch_gradients(&params, x.view(), &y, config.loss, config.delta)? {
                Some((value, grads)) => {
                    adam.step(&mut params, &grads, lr)?;
                    loss_sum += value;
                    used += 1;
                }
                None => skipped += 1,
            }
        }
        if used == 0 {
            return Err(Error::LossStarved { epoch });
        }
        let val_accuracy = accuracy(&params, val_set)?;
        if best.as_ref().is_none_or(|(acc, _)| val_accuracy > *acc) {
            best = Some((val_accuracy, params.clone()));
            best_epoch = epoch;
        }
        records.push(EpochRecord {
            lr,
            train_loss: loss_sum / used as f64,
            val_accuracy,
            batches: batches.len(),
            skipped_batches: skipped,
        });
    }

    let (_, params) = best.expect("at least one epoch ran");
    Ok(TrainOutcome { params, history: TrainHistory { epochs: records, best_epoch } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, SyntheticSpec};

    #[test]
    fn schedule_endpoints_and_midpoint() {
        let cfg = TrainConfig::new(LossKind::SoftmaxCe);
        assert_eq!(lr_at_epoch(&cfg, 0).unwrap(), 1e-3);
        assert_eq!(lr_at_epoch(&cfg, 19).unwrap(), 1e-4);
        let mid = (lr_at_epoch(&cfg, 9).unwrap() * lr_at_epoch(&cfg, 10).unwrap()).sqrt();
        assert!((mid - 3.1623e-4).abs() < 1e-8);
        assert!((lr_at_epoch(&cfg, 9).unwrap() - 1e-3 * 10f64.powf(-9.0 / 19.0)).abs() < 1e-18);
        assert!(lr_at_epoch(&cfg, 20).is_err());
        let one = TrainConfig { epochs: 1, ..cfg };
        assert_eq!(lr_at_epoch(&one, 0).unwrap(), 1e-3);
    }

    #[test]
    fn config_defaults_and_validation() {
        assert!(!TrainConfig::new(LossKind::SoftmaxCe).stratified);
        assert!(TrainConfig::new(LossKind::AaucOvr).stratified);
        let bad = TrainConfig { lr_end: 1e-2, ..TrainConfig::new(LossKind::AaucOvo) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_class_batches_starve_auc_training() {
        // Sorted labels with plain batching of size 2 give single-class batches.
        let mut spec = SyntheticSpec::separable(0);
        spec.proportions = None;
        spec.sizes.train = 6;
        let splits = gen_synthetic(&spec).unwrap();
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by_key(|&i| splits.train.labels.as_slice()[i]);
        let (x, y) = splits.train.select(&order);
        let sorted = Dataset::new(x, y, 3).unwrap();
        let p = MlpParams::init(&[4, 3], 0).unwrap();
        let single = sorted.select(&[0, 1]);
        assert!(batch_gradients(&p, single.0.view(), &single.1, LossKind::AaucOvo, SigmoidSlope::default())
            .unwrap()
            .is_none());
        assert!(batch_gradients(
            &p,
            single.0.view(),
            &single.1,
            LossKind::SoftmaxCe,
            SigmoidSlope::default()
        )
        .unwrap()
        .is_some());
    }

    #[test]
    fn best_epoch_is_reproducible() {
        let splits = gen_synthetic(&SyntheticSpec::limited_data(2)).unwrap();
        let cfg = TrainConfig { epochs: 4, seed: 3, ..TrainConfig::new(LossKind::AaucOvo) };
        let a = train(&splits.train, &splits.val, &[8, 16, 3], &cfg).unwrap();
        let b = train(&splits.train, &splits.val, &[8, 16, 3], &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params, b.params);
        let best = &a.history.epochs[a.history.best_epoch];
        assert!((accuracy(&a.params, &splits.val).unwrap() - best.val_accuracy).abs() <= 1e-12);
        assert!(a.history.epochs.iter().all(|e| e.val_accuracy <= best.val_accuracy));
    }
}
