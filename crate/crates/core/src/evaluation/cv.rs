use super::{regression_metrics, EvalError, Metrics};
use crate::gbdt::{GbdtError, Regressor};
use crate::matrix::DenseMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub fold_metrics: Vec<Metrics>,
    pub mean_metrics: Metrics,
    /// Sample standard deviation of the fold R² values.
    pub r2_std: f64,
    /// Fold index of every input row.
    pub fold_assignments: Vec<usize>,
}

impl CvReport {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// One row per fold followed by a `mean` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fold", "mae", "mse", "rmse", "r2"])?;
        let rows = self.fold_metrics.iter().enumerate().map(|(i, m)| ((i + 1).to_string(), m));
        for (label, m) in rows.chain(std::iter::once(("mean".to_string(), &self.mean_metrics))) {
            w.write_record([label, m.mae.to_string(), m.mse.to_string(), m.rmse.to_string(), m.r2.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seeded shuffle followed by contiguous folds. The first `n mod k` folds get
/// one extra row, so sizes differ by at most one.
pub fn fold_assignments(n: usize, k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    if n < k {
        return Err(EvalError::TooFewRows { rows: n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            folds[row] = fold;
        }
        pos += size;
    }
    Ok(folds)
}

pub(crate) fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// K-fold cross-validation of `trainer`.
///
/// Each fold is scored by [`regression_metrics`] on the held-out rows, so a
/// fold whose targets are all equal fails with `ZeroVarianceTarget`.
pub fn k_fold_cv<M, F>(x: &DenseMatrix, y: &[f64], k: usize, mut trainer: F, seed: u64) -> Result<CvReport, EvalError>
where
    M: Regressor,
    F: FnMut(&DenseMatrix, &[f64]) -> Result<M, GbdtError>,
{
    if x.rows() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.rows(), right: y.len() });
    }
    let folds = fold_assignments(y.len(), k, seed)?;
    let mut fold_metrics = Vec::with_capacity(k);
    for fold in 0..k {
        let (train, valid): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| folds[i] != fold);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = trainer(&x.select_rows(&train), &y_train)?;
        let y_valid: Vec<f64> = valid.iter().map(|&i| y[i]).collect();
        let pred = model.predict_rows(&x.select_rows(&valid));
        fold_metrics.push(regression_metrics(&y_valid, &pred)?);
    }
    let mean_metrics = Metrics::mean(&fold_metrics).expect("k >= 2");
    let r2: Vec<f64> = fold_metrics.iter().map(|m| m.r2).collect();
    Ok(CvReport { k, seed, r2_std: sample_std(&r2), fold_metrics, mean_metrics, fold_assignments: folds })
}
