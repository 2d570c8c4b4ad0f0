//! Gradient-boosted regression trees and the reference baselines.

mod baseline;
mod booster;
mod builder;
mod params;
mod tree;

pub use baseline::{fit_linear_regression, fit_random_forest, BaselineModel, ForestParams, LinearModel, RandomForest};
pub use booster::{fit_gbdt, fit_gbdt_observed, GbdtModel, RoundObserver};
pub use builder::{GrowthParams, NodeSampling, TreeBuilder};
pub use params::HyperParams;
pub use tree::{Node, RegressionTree};
pub(crate) use tree::goes_left;

use crate::matrix::DenseMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("training data contains NaN or infinite values")]
    NonFinite,
    #[error("normal equations are singular; use a positive ridge_epsilon")]
    SingularSystem,
}

/// Anything that maps one feature row to a real prediction.
pub trait Regressor {
    fn predict_row(&self, x: &[f64]) -> f64;

    fn predict_rows(&self, x: &DenseMatrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }
}

/// Grow a single second-order tree on the rows and features whose mask
/// entries are true.
///
/// # Panics
/// If the gradient, hessian or mask lengths disagree with `x`.
pub fn fit_tree(
    x: &DenseMatrix,
    gradients: &[f64],
    hessians: &[f64],
    params: &HyperParams,
    row_mask: &[bool],
    col_mask: &[bool],
) -> RegressionTree {
    assert_eq!(row_mask.len(), x.rows(), "row mask length");
    let rows: Vec<usize> = (0..x.rows()).filter(|&r| row_mask[r]).collect();
    TreeBuilder::new(x).fit(gradients, hessians, &params.growth(), &rows, col_mask, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_built_step_tree_predicts_plus_one() {
        let x = DenseMatrix::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]);
        let p = HyperParams { max_depth: 1, reg_lambda: 0.0, learning_rate: 1.0, base_score: Some(0.0), ..Default::default() };
        let tree = fit_tree(&x, &[-1.0, -1.0, 1.0, 1.0], &[1.0; 4], &p, &[true; 4], &[true]);
        let model = GbdtModel { params: p, feature_names: vec!["x".into()], base_score: 0.0, training_rows: 4, trees: vec![tree] };
        assert_eq!(model.predict(&[0.5]).unwrap(), 1.0);
        assert_eq!(model.predict_batch(&x).unwrap(), x.iter_rows().map(|r| model.predict(r).unwrap()).collect::<Vec<_>>());
    }
}
