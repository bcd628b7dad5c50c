//! Exact AUC by pair counting.
//!
//! A target/non-target pair scores 1 when the target is strictly higher, ½ on a
//! tie and 0 otherwise (the Mann-Whitney convention). With that rule
//! `AUC(pos, neg) + AUC(neg, pos) == 1` holds exactly.

use std::cmp::Ordering;

use crate::{Error, LabelVector, Result, ScoreMatrix};

/// Target scores `pos` and non-target scores `neg` for one binary comparison.
#[derive(Debug, Clone, Copy)]
pub struct BinaryScoreSets<'a> {
    pos: &'a [f64],
    neg: &'a [f64],
}

impl<'a> BinaryScoreSets<'a> {
    pub fn new(pos: &'a [f64], neg: &'a [f64]) -> Result<Self> {
        if pos.is_empty() {
            return Err(Error::UndefinedAuc("positive (target)"));
        }
        if neg.is_empty() {
            return Err(Error::UndefinedAuc("negative (non-target)"));
        }
        if pos.iter().chain(neg).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("binary score sets".into()));
        }
        Ok(Self { pos, neg })
    }

    pub fn pos(&self) -> &'a [f64] {
        self.pos
    }

    pub fn neg(&self) -> &'a [f64] {
        self.neg
    }

    /// Same sets with the roles of targets and non-targets exchanged.
    pub fn swapped(&self) -> Self {
        Self { pos: self.neg, neg: self.pos }
    }
}

/// Fraction of correctly ordered target/non-target pairs, ties counting ½.
pub fn binary_auc(sets: &BinaryScoreSets<'_>) -> f64 {
    // Twice the Mann-Whitney U, kept integral so the only rounding is the final division.
    let mut twice_u: u64 = 0;
    for &p in sets.pos {
        for &n in sets.neg {
            twice_u += match p.partial_cmp(&n) {
                Some(Ordering::Greater) => 2,
                Some(Ordering::Equal) => 1,
                _ => 0,
            };
        }
    }
    let pairs = (sets.pos.len() * sets.neg.len()) as f64;
    twice_u as f64 / (2.0 * pairs)
}

/// Scores of `column` for the rows selected by `keep`.
fn gather_column(
    scores: &ScoreMatrix,
    labels: &[usize],
    column: usize,
    keep: impl Fn(usize) -> bool,
) -> Vec<f64> {
    scores.column(column).iter().zip(labels).filter(|(_, &y)| keep(y)).map(|(&s, _)| s).collect()
}

/// Directed `AUC(C_target, C_other)`: column `target` scores, class `target` rows as
/// targets and class `other` rows as non-targets.
fn directed_auc(scores: &ScoreMatrix, labels: &[usize], target: usize, other: usize) -> Result<f64> {
    let pos = gather_column(scores, labels, target, |y| y == target);
    let neg = gather_column(scores, labels, target, |y| y == other);
    if pos.is_empty() {
        return Err(Error::EmptyClass(target));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass(other));
    }
    Ok(binary_auc(&BinaryScoreSets::new(&pos, &neg)?))
}

fn check_class(c: usize, k: usize) -> Result<()> {
    if k >= c {
        return Err(Error::InvalidArgument(format!("class index {k} out of range for {c} classes")));
    }
    Ok(())
}

/// Symmetrised separability of classes `i` and `j`:
/// `½ [AUC(C_i, C_j) + AUC(C_j, C_i)]`.
pub fn pairwise_auc_hat(scores: &ScoreMatrix, labels: &LabelVector, i: usize, j: usize) -> Result<f64> {
    let c = scores.n_classes();
    labels.check_against(scores.n_examples(), c)?;
    check_class(c, i)?;
    check_class(c, j)?;
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "pairwise AUC needs two distinct classes, got {i} twice"
        )));
    }
    // Order the operands by class index so (i, j) and (j, i) round identically.
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let a = directed_auc(scores, labels.as_slice(), lo, hi)?;
    let b = directed_auc(scores, labels.as_slice(), hi, lo)?;
    Ok(0.5 * (a + b))
}

/// One-versus-one multiclass AUC: the mean of [`pairwise_auc_hat`] over all
/// unordered class pairs.
pub fn auc_ovo(scores: &ScoreMatrix, labels: &LabelVector) -> Result<f64> {
    let c = scores.n_classes();
    labels.check_against(scores.n_examples(), c)?;
    labels.require_all_present(c)?;
    let mut sum = 0.0;
    for i in 0..c - 1 {
        for j in i + 1..c {
            sum += pairwise_auc_hat(scores, labels, i, j)?;
        }
    }
    Ok(2.0 / (c * (c - 1)) as f64 * sum)
}

/// One-versus-rest multiclass AUC: the mean over classes of the binary AUC of
/// column `i` with class `i` as targets and every other class as non-targets.
pub fn auc_ovr(scores: &ScoreMatrix, labels: &LabelVector) -> Result<f64> {
    let c = scores.n_classes();
    labels.check_against(scores.n_examples(), c)?;
    labels.require_all_present(c)?;
    let y = labels.as_slice();
    let mut sum = 0.0;
    for i in 0..c {
        let pos = gather_column(scores, y, i, |k| k == i);
        let neg = gather_column(scores, y, i, |k| k != i);
        sum += binary_auc(&BinaryScoreSets::new(&pos, &neg)?);
    }
    Ok(sum / c as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(pos: &[f64], neg: &[f64]) -> f64 {
        let mut s = 0.0;
        for p in pos {
            for n in neg {
                if p > n {
                    s += 1.0;
                } else if p == n {
                    s += 0.5;
                }
            }
        }
        s / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn binary_examples() {
        let auc = |p: &[f64], n: &[f64]| binary_auc(&BinaryScoreSets::new(p, n).unwrap());
        assert_eq!(auc(&[0.9, 0.8], &[0.1, 0.2]), 1.0);
        assert_eq!(auc(&[0.5], &[0.5]), 0.5);
        let (p, n) = ([0.8, 0.3], [0.5, 0.1]);
        assert_eq!(brute(&p, &n), 0.75);
        assert_eq!(auc(&p, &n), 0.75);
    }

    #[test]
    fn empty_side_is_named() {
        let e = BinaryScoreSets::new(&[], &[1.0]).unwrap_err();
        assert!(e.to_string().contains("positive"));
        let e = BinaryScoreSets::new(&[1.0], &[]).unwrap_err();
        assert!(e.to_string().contains("negative"));
    }

    fn toy() -> (ScoreMatrix, LabelVector) {
        let s = ScoreMatrix::from_rows(&[
            vec![0.6, 0.3, 0.1],
            vec![0.2, 0.5, 0.3],
            vec![0.4, 0.4, 0.2],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.1, 0.4],
            vec![0.1, 0.7, 0.2],
        ])
        .unwrap();
        (s, LabelVector::new(vec![0, 1, 0, 2, 2, 1]).unwrap())
    }

    #[test]
    fn pairwise_hat_matches_hand_count() {
        let (s, y) = toy();
        // Class 0 rows {0, 2}, class 1 rows {1, 5}.
        // AUC(C0, C1) on column 0: {0.6, 0.4} vs {0.2, 0.1} -> 1.
        // AUC(C1, C0) on column 1: {0.5, 0.7} vs {0.3, 0.4} -> 1.
        assert_eq!(pairwise_auc_hat(&s, &y, 0, 1).unwrap(), 1.0);
        // Class 0 vs class 2 (rows {3, 4}).
        // AUC(C0, C2) column 0: {0.6, 0.4} vs {0.3, 0.5}: 0.6>0.3, 0.6>0.5, 0.4>0.3, 0.4<0.5 -> 3/4.
        // AUC(C2, C0) column 2: {0.5, 0.4} vs {0.1, 0.2}: all 4 -> 1.
        let a02 = brute(&[0.6, 0.4], &[0.3, 0.5]);
        let a20 = brute(&[0.5, 0.4], &[0.1, 0.2]);
        assert_eq!(pairwise_auc_hat(&s, &y, 0, 2).unwrap(), 0.5 * (a02 + a20));
        assert_eq!(pairwise_auc_hat(&s, &y, 2, 0).unwrap(), 0.875);
    }

    #[test]
    fn perfect_and_uniform_scores() {
        let y = LabelVector::new(vec![0, 1, 2, 0, 1, 2]).unwrap();
        let onehot: Vec<Vec<f64>> =
            y.as_slice().iter().map(|&k| (0..3).map(|j| if j == k { 1.0 } else { 0.0 }).collect()).collect();
        let s = ScoreMatrix::from_rows(&onehot).unwrap();
        assert_eq!(auc_ovo(&s, &y).unwrap(), 1.0);
        assert_eq!(auc_ovr(&s, &y).unwrap(), 1.0);
        assert_eq!(pairwise_auc_hat(&s, &y, 1, 2).unwrap(), 1.0);

        let u = ScoreMatrix::from_rows(&vec![vec![1.0 / 3.0; 3]; 6]).unwrap();
        assert_eq!(auc_ovo(&u, &y).unwrap(), 0.5);
        assert_eq!(auc_ovr(&u, &y).unwrap(), 0.5);
        assert_eq!(pairwise_auc_hat(&u, &y, 0, 2).unwrap(), 0.5);
    }

    #[test]
    fn two_class_reductions() {
        let p = [0.9, 0.35, 0.6, 0.2, 0.55];
        let y = LabelVector::new(vec![1, 0, 1, 0, 0]).unwrap();
        let rows: Vec<Vec<f64>> = p.iter().map(|&v| vec![1.0 - v, v]).collect();
        let s = ScoreMatrix::from_rows(&rows).unwrap();
        assert_eq!(auc_ovo(&s, &y).unwrap(), pairwise_auc_hat(&s, &y, 0, 1).unwrap());
        let col1 = binary_auc(&BinaryScoreSets::new(&[0.9, 0.6], &[0.35, 0.2, 0.55]).unwrap());
        assert_eq!(auc_ovr(&s, &y).unwrap(), col1);
    }

    #[test]
    fn missing_class_is_reported() {
        let s = ScoreMatrix::from_rows(&[vec![0.5, 0.3, 0.2], vec![0.1, 0.8, 0.1]]).unwrap();
        let y = LabelVector::new(vec![0, 1]).unwrap();
        assert!(matches!(auc_ovo(&s, &y), Err(Error::EmptyClass(2))));
        assert!(matches!(auc_ovr(&s, &y), Err(Error::EmptyClass(2))));
        assert!(matches!(pairwise_auc_hat(&s, &y, 0, 2), Err(Error::EmptyClass(2))));
        assert!(pairwise_auc_hat(&s, &y, 1, 1).is_err());
    }
}
