use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::{Error, Result};

/// Per-example, per-class classifier scores (`N` rows, `c` columns).
///
/// Always holds at least one row and two columns, and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix(Array2<f64>);

impl ScoreMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, c) = values.dim();
        if n == 0 {
            return Err(Error::Shape("score matrix has no rows".into()));
        }
        if c < 2 {
            return Err(Error::Shape(format!("score matrix needs at least 2 class columns, got {c}")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("score matrix entry ({}, {})", pos / c, pos % c)));
        }
        Ok(Self(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::Shape("ragged score rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values =
            Array2::from_shape_vec((rows.len(), c), flat).map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(values)
    }

    pub fn n_examples(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn column(&self, class: usize) -> ArrayView1<'_, f64> {
        self.0.column(class)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

impl AsRef<Array2<f64>> for ScoreMatrix {
    fn as_ref(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Integer class labels, one per example.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelVector(Vec<usize>);

impl LabelVector {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Shape("label vector is empty".into()));
        }
        Ok(Self(labels))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One more than the largest label.
    pub fn implied_classes(&self) -> usize {
        self.0.iter().max().map_or(0, |m| m + 1)
    }

    pub fn class_counts(&self, classes: usize) -> Vec<usize> {
        let mut counts = vec![0; classes];
        for &y in &self.0 {
            if y < classes {
                counts[y] += 1;
            }
        }
        counts
    }

    pub fn select(&self, rows: &[usize]) -> LabelVector {
        LabelVector(rows.iter().map(|&r| self.0[r]).collect())
    }

    /// Checks that the labels index into `classes` columns and that the row count matches.
    pub(crate) fn check_against(&self, n: usize, classes: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::Shape(format!("{} labels for {n} score rows", self.0.len())));
        }
        if let Some((i, &y)) = self.0.iter().enumerate().find(|(_, &y)| y >= classes) {
            return Err(Error::Shape(format!("label {y} at row {i} is out of range for {classes} classes")));
        }
        Ok(())
    }

    /// Errors with the first class that has no examples.
    pub(crate) fn require_all_present(&self, classes: usize) -> Result<()> {
        match self.class_counts(classes).iter().position(|&n| n == 0) {
            Some(k) => Err(Error::EmptyClass(k)),
            None => Ok(()),
        }
    }
}

impl From<LabelVector> for Vec<usize> {
    fn from(labels: LabelVector) -> Self {
        labels.0
    }
}

/// Row-wise argmax; ties resolve to the lowest column index.
pub fn argmax_rows(values: ArrayView2<'_, f64>) -> Vec<usize> {
    values
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}
