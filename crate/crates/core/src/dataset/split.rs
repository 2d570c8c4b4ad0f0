//! Seeded hold-out splitting.

use super::encoding::FeatureMatrix;
use super::DatasetError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One side of a split.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub x: FeatureMatrix,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Subset,
    pub test: Subset,
    pub seed: u64,
}

/// Number of test rows for `n` rows at `test_fraction`: `ceil(n * fraction)`.
pub fn test_size(n: usize, test_fraction: f64) -> usize {
    // The epsilon keeps exact products such as 10 * 0.2 from rounding up.
    ((n as f64) * test_fraction - 1e-9).ceil().max(0.0) as usize
}

/// Shuffle row indices with `seed` and send the first `ceil(n * test_fraction)`
/// of them to the test side.
pub fn train_test_split(
    x: &FeatureMatrix,
    y: &[f64],
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPair, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(test_fraction));
    }
    let n = y.len();
    if n != x.rows() {
        return Err(DatasetError::LengthMismatch { rows: x.rows(), targets: n });
    }
    let n_test = test_size(n, test_fraction);
    if n < 2 || n_test == 0 || n_test >= n {
        return Err(DatasetError::TooFewRows { rows: n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test_idx, train_idx) = order.split_at(n_test);

    let subset = |idx: &[usize]| Subset {
        x: x.select_rows(idx),
        y: idx.iter().map(|&i| y[i]).collect(),
    };
    Ok(SplitPair { train: subset(train_idx), test: subset(test_idx), seed })
}
