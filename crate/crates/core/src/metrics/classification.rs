use serde::{Deserialize, Serialize};

use crate::{Error, LabelVector, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Hard-decision metrics computed from predicted and true labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassScores>,
    /// Set when some precision, recall or f1 had a zero denominator and was reported as 0.
    pub warnings: Vec<String>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classification_report(
    pred: &LabelVector,
    truth: &LabelVector,
    classes: usize,
) -> Result<ClassificationReport> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!("{} predictions for {} true labels", pred.len(), truth.len())));
    }
    pred.check_against(pred.len(), classes)?;
    truth.check_against(truth.len(), classes)?;

    // confusion[t][p]
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
        confusion[t][p] += 1;
    }
    let correct: usize = (0..classes).map(|k| confusion[k][k]).sum();
    let mut warnings = Vec::new();
    let per_class = (0..classes)
        .map(|k| {
            let tp = confusion[k][k];
            let predicted: usize = (0..classes).map(|t| confusion[t][k]).sum();
            let actual: usize = confusion[k].iter().sum();
            let precision = ratio(tp, predicted).unwrap_or_else(|| {
                warnings.push(format!("class {k}: precision undefined (never predicted), set to 0"));
                0.0
            });
            let recall = ratio(tp, actual).unwrap_or_else(|| {
                warnings.push(format!("class {k}: recall undefined (never present), set to 0"));
                0.0
            });
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                warnings.push(format!("class {k}: f1 undefined, set to 0"));
                0.0
            };
            ClassScores { precision, recall, f1 }
        })
        .collect();
    Ok(ClassificationReport { accuracy: correct as f64 / truth.len() as f64, per_class, warnings })
}
