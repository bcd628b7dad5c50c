//! Precision-recall curves and step-rule average precision.

use serde::{Deserialize, Serialize};

use crate::{Error, LabelVector, Result, ScoreMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    /// Examples scoring at or above this value are predicted positive.
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// One point per distinct score, in descending threshold order.
///
/// Recall is therefore non-decreasing along `points` and the last point always
/// has recall 1. The recall-0 anchor is implicit: [`average_precision`]
/// integrates from recall 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Sweeps every distinct value of `scores` as a threshold. Tied scores enter
/// the positive set together.
pub fn pr_curve(scores: &[f64], positives: &[bool]) -> Result<PrCurve> {
    if scores.len() != positives.len() {
        return Err(Error::Shape(format!("{} scores for {} binary labels", scores.len(), positives.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("PR curve scores".into()));
    }
    let total_pos = positives.iter().filter(|&&p| p).count();
    if total_pos == 0 {
        return Err(Error::UndefinedRecall);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            tp += usize::from(positives[order[k]]);
            seen += 1;
            k += 1;
        }
        points.push(PrPoint {
            threshold,
            recall: tp as f64 / total_pos as f64,
            precision: tp as f64 / seen as f64,
        });
    }
    Ok(PrCurve { points })
}

/// `Σ_k (R_k − R_{k−1}) P_k` over the points in descending threshold order,
/// starting from `R = 0`. No interpolation between points.
pub fn average_precision(curve: &PrCurve) -> f64 {
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for p in &curve.points {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    ap
}

/// Per-class one-versus-rest curves, class `k` scored by column `k`.
pub fn class_pr_curves(scores: &ScoreMatrix, labels: &LabelVector) -> Result<Vec<PrCurve>> {
    let c = scores.n_classes();
    labels.check_against(scores.n_examples(), c)?;
    (0..c)
        .map(|k| {
            let col = scores.column(k).to_vec();
            let pos: Vec<bool> = labels.as_slice().iter().map(|&y| y == k).collect();
            pr_curve(&col, &pos)
        })
        .collect()
}

/// Unweighted mean of the per-class average precisions.
pub fn macro_avg_ap(scores: &ScoreMatrix, labels: &LabelVector) -> Result<f64> {
    let curves = class_pr_curves(scores, labels)?;
    Ok(curves.iter().map(average_precision).sum::<f64>() / curves.len() as f64)
}

/// Precision at the highest threshold whose recall reaches `recall`, with that threshold.
pub fn precision_at_recall(curve: &PrCurve, recall: f64) -> (f64, f64) {
    let p = curve
        .points
        .iter()
        .find(|p| p.recall >= recall)
        .or(curve.points.last())
        .expect("PR curves always hold at least one point");
    (p.threshold, p.precision)
}
