//! Exact evaluation metrics.
//!
//! Everything here is a pure function of its inputs. AUCs are computed by explicit
//! pair enumeration, which is quadratic in the example count but exact and
//! trivially auditable at the sizes this crate works with.

mod auc;
mod classification;
mod pr;

pub use auc::{auc_ovo, auc_ovr, binary_auc, pairwise_auc_hat, BinaryScoreSets};
pub use classification::{classification_report, ClassScores, ClassificationReport};
pub use pr::{
    average_precision, class_pr_curves, macro_avg_ap, pr_curve, precision_at_recall, PrCurve, PrPoint,
};

use serde::{Deserialize, Serialize};

use crate::{LabelVector, Result, ScoreMatrix};

/// Threshold-free metrics on scores plus hard-decision metrics on predicted labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassScores>,
    pub auc_ovo: f64,
    pub auc_ovr: f64,
    pub avg_pr_auc: f64,
    pub per_class_pr_auc: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Scores every metric: AUCs and PR from `scores`, decision metrics from `pred`.
pub fn evaluate(scores: &ScoreMatrix, pred: &LabelVector, truth: &LabelVector) -> Result<MetricsReport> {
    let c = scores.n_classes();
    let hard = classification_report(pred, truth, c)?;
    let per_class_pr_auc: Vec<f64> = class_pr_curves(scores, truth)?.iter().map(average_precision).collect();
    Ok(MetricsReport {
        accuracy: hard.accuracy,
        per_class: hard.per_class,
        auc_ovo: auc_ovo(scores, truth)?,
        auc_ovr: auc_ovr(scores, truth)?,
        avg_pr_auc: per_class_pr_auc.iter().sum::<f64>() / c as f64,
        per_class_pr_auc,
        warnings: hard.warnings,
    })
}
