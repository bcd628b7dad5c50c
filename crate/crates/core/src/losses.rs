//! Differentiable training objectives.
//!
//! The AUC surrogates replace the step function of the pair-counting AUC with a
//! sigmoid of slope `δ`:
//!
//! ```text
//! aAUC = 1/(N⁺N⁻) Σᵢ Σⱼ σ(δ (sᵢ⁺ − sⱼ⁻))
//! ```
//!
//! The multiclass forms compose directed `aAUC` terms exactly as the exact
//! one-versus-one and one-versus-rest metrics compose directed AUCs. Every loss is
//! oriented for minimisation (`1 − aAUC`) and returns its gradient with respect to
//! the score matrix it was given.
//!
//! Within a minibatch, directed terms whose target or non-target set is empty are
//! dropped and the average is taken over the terms that remain.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::metrics::BinaryScoreSets;
use crate::{Error, LabelVector, Result, ScoreMatrix};

pub const DEFAULT_DELTA: f64 = 10.0;

/// Slope `δ > 0` of the sigmoid replacing the unit step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SigmoidSlope(f64);

impl SigmoidSlope {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigmoid slope must be positive and finite, got {delta}"
            )));
        }
        Ok(Self(delta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for SigmoidSlope {
    fn default() -> Self {
        Self(DEFAULT_DELTA)
    }
}

impl TryFrom<f64> for SigmoidSlope {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SigmoidSlope> for f64 {
    fn from(s: SigmoidSlope) -> f64 {
        s.0
    }
}

/// Loss to minimise and its gradient with respect to each score entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValueAndGrad {
    pub value: f64,
    pub grad: Array2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LossKind {
    #[serde(rename = "ce")]
    SoftmaxCe,
    #[serde(rename = "aauc-ovo")]
    AaucOvo,
    #[serde(rename = "aauc-ovr")]
    AaucOvr,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::SoftmaxCe, LossKind::AaucOvo, LossKind::AaucOvr];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::SoftmaxCe => "ce",
            LossKind::AaucOvo => "aauc-ovo",
            LossKind::AaucOvr => "aauc-ovr",
        }
    }

    pub fn is_auc(self) -> bool {
        !matches!(self, LossKind::SoftmaxCe)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ce" | "softmax-ce" => Ok(LossKind::SoftmaxCe),
            "aauc-ovo" => Ok(LossKind::AaucOvo),
            "aauc-ovr" => Ok(LossKind::AaucOvr),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss '{other}' (expected ce, aauc-ovo or aauc-ovr)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AucMode {
    Ovo,
    Ovr,
}

/// Number of directed `aAUC` terms a full multiclass surrogate evaluates.
pub fn pair_count_cost(classes: usize, mode: AucMode) -> usize {
    match mode {
        AucMode::Ovo => classes * classes.saturating_sub(1),
        AucMode::Ovr => classes,
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logistic sigmoid that never overflows; `σ(0)` is exactly `0.5`.
pub fn stable_sigmoid(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("sigmoid argument {x}")));
    }
    Ok(sigmoid(x))
}

struct PairTerm {
    value: f64,
    dpos: Vec<f64>,
    dneg: Vec<f64>,
}

/// aAUC over all (pos, neg) pairs with its partial derivatives.
fn aauc_pairs(pos: &[f64], neg: &[f64], delta: f64) -> PairTerm {
    let norm = 1.0 / (pos.len() * neg.len()) as f64;
    let mut sum = 0.0;
    let mut dpos = vec![0.0; pos.len()];
    let mut dneg = vec![0.0; neg.len()];
    for (i, &p) in pos.iter().enumerate() {
        for (j, &n) in neg.iter().enumerate() {
            let s = sigmoid(delta * (p - n));
            sum += s;
            let d = delta * s * (1.0 - s) * norm;
            dpos[i] += d;
            dneg[j] -= d;
        }
    }
    PairTerm { value: sum * norm, dpos, dneg }
}

/// Sigmoid-smoothed binary AUC.
pub fn aauc_binary(sets: &BinaryScoreSets<'_>, slope: SigmoidSlope) -> f64 {
    aauc_pairs(sets.pos(), sets.neg(), slope.get()).value
}

/// Partial derivatives of [`aauc_binary`] (the AUC itself, not the loss).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGrad {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

pub fn aauc_binary_grad(sets: &BinaryScoreSets<'_>, slope: SigmoidSlope) -> BinaryGrad {
    let t = aauc_pairs(sets.pos(), sets.neg(), slope.get());
    BinaryGrad { pos: t.dpos, neg: t.dneg }
}

#[allow(clippy::too_many_arguments)]
/// Evaluates one directed term on `column` and subtracts `weight · ∂aAUC/∂s` from `grad`.
///
/// Target and non-target rows are selected by scanning the batch labels, so a term
/// costs `O(N)` to assemble plus `O(N⁺N⁻)` to evaluate.
fn directed_term(
    scores: ArrayView2<'_, f64>,
    labels: &[usize],
    column: usize,
    is_target: impl Fn(usize) -> bool,
    is_nontarget: impl Fn(usize) -> bool,
    delta: f64,
    weight: f64,
    grad: &mut Array2<f64>,
) -> f64 {
    let mut pos_rows = Vec::new();
    let mut neg_rows = Vec::new();
    for (r, &y) in labels.iter().enumerate() {
        if is_target(y) {
            pos_rows.push(r);
        } else if is_nontarget(y) {
            neg_rows.push(r);
        }
    }
    let col = scores.column(column);
    let pos: Vec<f64> = pos_rows.iter().map(|&r| col[r]).collect();
    let neg: Vec<f64> = neg_rows.iter().map(|&r| col[r]).collect();
    let t = aauc_pairs(&pos, &neg, delta);
    for (&r, d) in pos_rows.iter().zip(&t.dpos) {
        grad[[r, column]] -= weight * d;
    }
    for (&r, d) in neg_rows.iter().zip(&t.dneg) {
        grad[[r, column]] -= weight * d;
    }
    t.value
}

fn present_classes(counts: &[usize]) -> usize {
    counts.iter().filter(|&&n| n > 0).count()
}

/// `1 − aAUC_OVO`, averaged over class pairs with both classes in the batch.
pub fn aauc_ovo_loss(
    scores: &ScoreMatrix,
    labels: &LabelVector,
    slope: SigmoidSlope,
) -> Result<LossValueAndGrad> {
    let (n, c) = (scores.n_examples(), scores.n_classes());
    labels.check_against(n, c)?;
    let counts = labels.class_counts(c);
    let present = present_classes(&counts);
    if present < 2 {
        return Err(Error::DegenerateBatch { present });
    }
    let pairs = present * (present - 1) / 2;
    let weight = 0.5 / pairs as f64;
    let y = labels.as_slice();
    let view = scores.view();
    let mut grad = Array2::zeros((n, c));
    let mut sum = 0.0;
    for i in 0..c - 1 {
        for j in i + 1..c {
            if counts[i] == 0 || counts[j] == 0 {
                continue;
            }
            let a_ij = directed_term(view, y, i, |k| k == i, |k| k == j, slope.get(), weight, &mut grad);
            let a_ji = directed_term(view, y, j, |k| k == j, |k| k == i, slope.get(), weight, &mut grad);
            sum += 0.5 * (a_ij + a_ji);
        }
    }
    Ok(LossValueAndGrad { value: 1.0 - sum / pairs as f64, grad })
}

/// `1 − aAUC_OVR`, averaged over classes that have both in-class and out-of-class
/// examples in the batch.
pub fn aauc_ovr_loss(
    scores: &ScoreMatrix,
    labels: &LabelVector,
    slope: SigmoidSlope,
) -> Result<LossValueAndGrad> {
    let (n, c) = (scores.n_examples(), scores.n_classes());
    labels.check_against(n, c)?;
    let counts = labels.class_counts(c);
    let present = present_classes(&counts);
    if present < 2 {
        return Err(Error::DegenerateBatch { present });
    }
    // With two or more classes present, every present class has a non-empty complement.
    let terms = present;
    let weight = 1.0 / terms as f64;
    let y = labels.as_slice();
    let view = scores.view();
    let mut grad = Array2::zeros((n, c));
    let mut sum = 0.0;
    for i in (0..c).filter(|&i| counts[i] > 0) {
        sum += directed_term(view, y, i, |k| k == i, |k| k != i, slope.get(), weight, &mut grad);
    }
    Ok(LossValueAndGrad { value: 1.0 - sum / terms as f64, grad })
}

/// Mean softmax cross-entropy of raw `logits`; the gradient is wrt the logits.
pub fn softmax_ce_loss(logits: ArrayView2<'_, f64>, labels: &LabelVector) -> Result<LossValueAndGrad> {
    let (n, c) = logits.dim();
    labels.check_against(n, c)?;
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits".into()));
    }
    let mut grad = Array2::zeros((n, c));
    let mut total = 0.0;
    for ((row, mut g), &y) in
        logits.axis_iter(Axis(0)).zip(grad.axis_iter_mut(Axis(0))).zip(labels.as_slice())
    {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let sum_exp: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_z = max + sum_exp.ln();
        total += log_z - row[y];
        for (k, gk) in g.iter_mut().enumerate() {
            let p = (row[k] - log_z).exp();
            *gk = (p - if k == y { 1.0 } else { 0.0 }) / n as f64;
        }
    }
    Ok(LossValueAndGrad { value: total / n as f64, grad })
}
