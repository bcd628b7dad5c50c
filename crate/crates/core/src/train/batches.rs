//! Minibatch construction.
//!
//! Plain mode shuffles all indices and cuts them into consecutive batches.
//! Stratified mode shuffles within each class and then interleaves the classes
//! proportionally: the `r`-th of `n_k` examples of class `k` is placed at
//! position key `(r + ½) / n_k`, ties broken by class index. With balanced
//! classes this is exact round-robin; with imbalanced classes every batch
//! receives each class in (rounded) proportion to its frequency.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, LabelVector, Result};

/// Index batches covering `0..labels.len()` exactly once. The last batch may be short.
pub fn make_batches(
    labels: &LabelVector,
    batch_size: usize,
    seed: u64,
    stratified: bool,
) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    if batch_size == 0 || batch_size > n {
        return Err(Error::InvalidArgument(format!(
            "batch size {batch_size} must be between 1 and the {n} available examples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = if stratified {
        let classes = labels.implied_classes();
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
        for (i, &y) in labels.as_slice().iter().enumerate() {
            by_class[y].push(i);
        }
        let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
        for (k, members) in by_class.iter_mut().enumerate() {
            members.shuffle(&mut rng);
            let m = members.len() as f64;
            keyed.extend(members.iter().enumerate().map(|(r, &i)| ((r as f64 + 0.5) / m, k, i)));
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.into_iter().map(|(_, _, i)| i).collect()
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    };
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}
