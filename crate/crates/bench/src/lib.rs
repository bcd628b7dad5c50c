//! Shared fixtures for the criterion benchmarks.

use mcauc::{LabelVector, ScoreMatrix};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A softmax-like score matrix of `n` rows over `classes` columns with
/// round-robin labels, so every class is present whenever `n >= classes`.
pub fn score_batch(n: usize, classes: usize, seed: u64) -> (ScoreMatrix, LabelVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::from_shape_simple_fn((n, classes), || rng.random_range(0.05..1.0));
    for mut row in values.rows_mut() {
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    let labels = (0..n).map(|i| i % classes).collect();
    (ScoreMatrix::new(values).expect("finite scores"), LabelVector::new(labels).expect("non-empty"))
}
