//! Second-order boosting under squared error.

use super::builder::TreeBuilder;
use super::tree::RegressionTree;
use super::{GbdtError, HyperParams, Regressor};
use crate::matrix::DenseMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A trained ensemble. Predicts `base_score + learning_rate · Σ_t w_t(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub params: HyperParams,
    pub feature_names: Vec<String>,
    pub base_score: f64,
    pub training_rows: usize,
    pub trees: Vec<RegressionTree>,
}

impl GbdtModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.params.learning_rate
    }

    /// Prediction using only the first `n_trees` trees.
    pub fn predict_prefix(&self, x: &[f64], n_trees: usize) -> f64 {
        let sum: f64 = self.trees.iter().take(n_trees).map(|t| t.predict(x)).sum();
        self.base_score + self.params.learning_rate * sum
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, GbdtError> {
        if x.len() != self.n_features() {
            return Err(GbdtError::DimensionMismatch { expected: self.n_features(), got: x.len() });
        }
        Ok(self.predict_prefix(x, self.trees.len()))
    }

    pub fn predict_batch(&self, x: &DenseMatrix) -> Result<Vec<f64>, GbdtError> {
        if x.cols() != self.n_features() {
            return Err(GbdtError::DimensionMismatch { expected: self.n_features(), got: x.cols() });
        }
        Ok(x.iter_rows().map(|r| self.predict_prefix(r, self.trees.len())).collect())
    }

    /// The same ensemble cut to its first `n_trees` rounds.
    pub fn truncated(&self, n_trees: usize) -> GbdtModel {
        let mut m = self.clone();
        m.trees.truncate(n_trees);
        m.params.n_estimators = m.trees.len().max(1);
        m
    }
}

impl Regressor for GbdtModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        self.predict_prefix(x, self.trees.len())
    }
}

/// Per-round training state, exposed for loss-curve inspection.
pub struct RoundObserver<'a> {
    pub on_round: &'a mut dyn FnMut(usize, &[f64]),
}

/// Fit a boosted ensemble of exactly `params.n_estimators` trees.
///
/// Each round uses gradients `ŷ − y` and unit hessians. Row subsampling draws
/// `round(n · subsample)` rows without replacement and column sampling draws
/// `max(1, round(p · colsample_bytree))` features, both from a ChaCha8 stream
/// seeded by `params.seed`, rows first. Sampling never depends on the total
/// round count, so the first `k` trees of a longer fit equal a `k`-round fit.
pub fn fit_gbdt(
    x: &DenseMatrix,
    y: &[f64],
    feature_names: &[String],
    params: &HyperParams,
) -> Result<GbdtModel, GbdtError> {
    fit_gbdt_observed(x, y, feature_names, params, None)
}

/// `fit_gbdt` with a callback receiving the training predictions after each round.
pub fn fit_gbdt_observed(
    x: &DenseMatrix,
    y: &[f64],
    feature_names: &[String],
    params: &HyperParams,
    mut observer: Option<RoundObserver<'_>>,
) -> Result<GbdtModel, GbdtError> {
    params.validate()?;
    let n = x.rows();
    let p = x.cols();
    if y.len() != n {
        return Err(GbdtError::LengthMismatch { rows: n, targets: y.len() });
    }
    if feature_names.len() != p {
        return Err(GbdtError::DimensionMismatch { expected: p, got: feature_names.len() });
    }
    if n < 2 {
        return Err(GbdtError::TooFewRows(n));
    }
    if y.iter().any(|v| !v.is_finite()) || x.data().iter().any(|v| v.is_nan()) {
        return Err(GbdtError::NonFinite);
    }

    let base_score = params.base_score.unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let builder = TreeBuilder::new(x);
    let growth = params.growth();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let lr = params.learning_rate;

    let mut weight_sum = vec![0.0; n];
    let mut pred = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let hess = vec![1.0; n];
    let all_rows: Vec<usize> = (0..n).collect();
    let n_rows = ((n as f64 * params.subsample).round() as usize).clamp(1, n);
    let n_cols = ((p as f64 * params.colsample_bytree).round() as usize).clamp(1, p.max(1));
    let mut trees = Vec::with_capacity(params.n_estimators);

    for round in 0..params.n_estimators {
        let rows = if n_rows < n {
            let mut r = sample(&mut rng, n, n_rows).into_vec();
            r.sort_unstable();
            r
        } else {
            all_rows.clone()
        };
        let mut col_mask = vec![n_cols == p; p];
        if n_cols < p {
            for j in sample(&mut rng, p, n_cols) {
                col_mask[j] = true;
            }
        }
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        let tree = builder.fit(&grad, &hess, &growth, &rows, &col_mask, None);
        for i in 0..n {
            weight_sum[i] += tree.predict(x.row(i));
            pred[i] = base_score + lr * weight_sum[i];
        }
        trees.push(tree);
        if let Some(obs) = observer.as_mut() {
            (obs.on_round)(round, &pred);
        }
    }

    Ok(GbdtModel {
        params: params.clone(),
        feature_names: feature_names.to_vec(),
        base_score,
        training_rows: n,
        trees,
    })
}
