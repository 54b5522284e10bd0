//! Seeded random problems for test sweeps.

use optboost_core::{Dataset, DichotomyPool};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// A random dataset and a random ±1 pool of `m` rows.
///
/// When `m >= 3` the first three rows are planted: row `b` is correct on every
/// example except those with `i % 3 == b`. Their uniform mixture has margin
/// 1/3 on every example, so the weak learning condition holds for the whole
/// run. The remaining rows are uniform noise.
pub fn random_problem(seed: u64, n: usize, d: usize, m: usize) -> Result<(Dataset, DichotomyPool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| f64::from(rng.gen_range(0..1000u32)) / 100.0).collect())
        .collect();
    let labels: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let data = Dataset::from_rows(rows, labels.clone())?;

    let planted = if m >= 3 { 3 } else { 0 };
    let mut matrix: Vec<Vec<i64>> = (0..planted)
        .map(|block| {
            (0..n)
                .map(|i| {
                    let y = labels[i] as i64;
                    if i % 3 == block { -y } else { y }
                })
                .collect()
        })
        .collect();
    for _ in planted..m {
        matrix.push((0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect());
    }
    let pool = DichotomyPool::from_rows(&matrix, &data)?;
    Ok((data, pool))
}
