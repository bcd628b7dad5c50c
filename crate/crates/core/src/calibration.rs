//! Multinomial logistic regression on classifier score vectors, fitted with plain
//! minibatch SGD. It maps a `c`-dimensional score vector `s` to calibrated logits
//! `W s + b`; the final label is their argmax.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, LabelVector, Result, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratorParams {
    /// `weights[k][m]`: contribution of input score `m` to output logit `k`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { lr: 0.05, epochs: 200, batch: 32, seed: 0 }
    }
}

impl CalibratorParams {
    /// Identity weights and zero bias: predicts the plain argmax of the scores.
    pub fn identity(classes: usize) -> Self {
        Self {
            weights: (0..classes)
                .map(|k| (0..classes).map(|m| if k == m { 1.0 } else { 0.0 }).collect())
                .collect(),
            bias: vec![0.0; classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub(crate) fn check_classes(&self, classes: usize) -> Result<()> {
        let c = self.n_classes();
        if c != classes || self.weights.len() != c || self.weights.iter().any(|r| r.len() != c) {
            return Err(Error::Shape(format!("calibrator is not {classes}x{classes}")));
        }
        if self.weights.iter().flatten().chain(&self.bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("calibrator parameters".into()));
        }
        Ok(())
    }

    fn logits_into(&self, s: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.bias[k] + self.weights[k].iter().zip(s).map(|(w, x)| w * x).sum::<f64>();
        }
    }

    /// Calibrated logits, one row per input row.
    pub fn logits(&self, scores: &ScoreMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_classes(scores.n_classes())?;
        let c = self.n_classes();
        Ok(scores
            .view()
            .rows()
            .into_iter()
            .map(|row| {
                let mut out = vec![0.0; c];
                self.logits_into(&row.to_vec(), &mut out);
                out
            })
            .collect())
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    z.iter_mut().for_each(|v| *v /= total);
}

/// Per-column centre and scale of the fitting scores. SGD runs on the
/// standardised scores `(s − μ) / σ`, which keeps the problem well conditioned
/// when a classifier's softmax outputs span only a narrow range; the fitted map
/// is folded back into raw-score coordinates afterwards.
fn column_stats(rows: &[Vec<f64>], c: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..c).map(|m| rows.iter().map(|r| r[m]).sum::<f64>() / n).collect();
    let scale = (0..c)
        .map(|m| {
            let var = rows.iter().map(|r| (r[m] - mean[m]).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            // constant columns carry no information; leave them unscaled
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

/// Minimises mean softmax cross-entropy of `W s + b` from the identity start.
pub fn fit_calibrator(
    scores: &ScoreMatrix,
    labels: &LabelVector,
    sgd: &SgdConfig,
) -> Result<CalibratorParams> {
    let (n, c) = (scores.n_examples(), scores.n_classes());
    labels.check_against(n, c)?;
    labels.require_all_present(c)?;
    if !(sgd.lr > 0.0 && sgd.lr.is_finite()) || sgd.batch == 0 {
        return Err(Error::InvalidArgument(format!(
            "calibration SGD needs lr > 0 and batch >= 1, got lr {} batch {}",
            sgd.lr, sgd.batch
        )));
    }
    if sgd.epochs == 0 {
        return Ok(CalibratorParams::identity(c));
    }
    let raw: Vec<Vec<f64>> = scores.view().rows().into_iter().map(|r| r.to_vec()).collect();
    let (mean, scale) = column_stats(&raw, c);
    let rows: Vec<Vec<f64>> =
        raw.iter().map(|r| (0..c).map(|m| (r[m] - mean[m]) / scale[m]).collect()).collect();
    let y = labels.as_slice();

    // Standardised-space parameters equivalent to the identity map on raw scores.
    let mut cal = CalibratorParams {
        weights: (0..c).map(|k| (0..c).map(|m| if k == m { scale[m] } else { 0.0 }).collect()).collect(),
        bias: mean.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sgd.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut probs = vec![0.0; c];
    let mut gw = vec![vec![0.0; c]; c];
    let mut gb = vec![0.0; c];

    for _ in 0..sgd.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(sgd.batch) {
            gw.iter_mut().flatten().for_each(|v| *v = 0.0);
            gb.iter_mut().for_each(|v| *v = 0.0);
            for &r in batch {
                cal.logits_into(&rows[r], &mut probs);
                softmax_in_place(&mut probs);
                probs[y[r]] -= 1.0;
                for k in 0..c {
                    gb[k] += probs[k];
                    for m in 0..c {
                        gw[k][m] += probs[k] * rows[r][m];
                    }
                }
            }
            let step = sgd.lr / batch.len() as f64;
            for ((w, b), (gw, gb)) in cal.weights.iter_mut().zip(&mut cal.bias).zip(gw.iter().zip(&gb)) {
                *b -= step * gb;
                for (w, g) in w.iter_mut().zip(gw) {
                    *w -= step * g;
                }
            }
        }
    }

    // W' (s − μ)/σ + b'  =  (W' / σ) s + (b' − W' μ/σ)
    for k in 0..c {
        for m in 0..c {
            cal.weights[k][m] /= scale[m];
            cal.bias[k] -= cal.weights[k][m] * mean[m];
        }
    }
    Ok(cal)
}

/// Argmax of the calibrated logits; ties go to the lowest class index.
pub fn calibrate_predict(cal: &CalibratorParams, scores: &ScoreMatrix) -> Result<LabelVector> {
    let logits = cal.logits(scores)?;
    let pred = logits
        .iter()
        .map(|z| {
            let mut best = 0;
            for k in 1..z.len() {
                if z[k] > z[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    LabelVector::new(pred)
}
