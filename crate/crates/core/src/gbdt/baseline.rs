//! Reference regressors: ridge-stabilized least squares and a bagged CART
//! forest.

use super::builder::{GrowthParams, NodeSampling, TreeBuilder};
use super::tree::RegressionTree;
use super::{GbdtError, Regressor};
use crate::matrix::DenseMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineModel {
    Linear(LinearModel),
    RandomForest(RandomForest),
}

impl Regressor for LinearModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

impl Regressor for RandomForest {
    fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

impl Regressor for BaselineModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            BaselineModel::Linear(m) => m.predict_row(x),
            BaselineModel::RandomForest(m) => m.predict_row(x),
        }
    }
}

/// Least squares with an unpenalized intercept:
/// minimizes `‖Xβ + b − y‖² + ε‖β‖²` through the centered normal equations.
///
/// With `ridge_epsilon = 0` a rank-deficient design is reported as
/// `SingularSystem` rather than solved.
pub fn fit_linear_regression(x: &DenseMatrix, y: &[f64], ridge_epsilon: f64) -> Result<BaselineModel, GbdtError> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(GbdtError::LengthMismatch { rows: n, targets: y.len() });
    }
    if n == 0 {
        return Err(GbdtError::TooFewRows(0));
    }
    if !(ridge_epsilon >= 0.0) {
        return Err(GbdtError::InvalidParams(format!("ridge_epsilon {ridge_epsilon} < 0")));
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let x_mean: Vec<f64> = (0..p).map(|j| x.column(j).sum::<f64>() / n as f64).collect();

    let xc = DMatrix::from_fn(n, p, |i, j| x.get(i, j) - x_mean[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let mut gram = xc.tr_mul(&xc);
    for j in 0..p {
        gram[(j, j)] += ridge_epsilon;
    }
    let rhs = xc.tr_mul(&yc);

    let beta = if p == 0 {
        DVector::zeros(0)
    } else {
        let max_diag = (0..p).map(|j| gram[(j, j)]).fold(0.0_f64, f64::max);
        let chol = gram.clone().cholesky().ok_or(GbdtError::SingularSystem)?;
        // Without a ridge term, pivots that collapse relative to the largest
        // diagonal mean the system is numerically rank deficient. With one,
        // collinear one-hot groups are resolved by the penalty.
        let l = chol.l();
        let tol = 1e-10 * max_diag.max(f64::MIN_POSITIVE);
        if ridge_epsilon == 0.0 && (0..p).any(|j| l[(j, j)] * l[(j, j)] <= tol) {
            return Err(GbdtError::SingularSystem);
        }
        chol.solve(&rhs)
    };

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let intercept = y_mean - coefficients.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
    Ok(BaselineModel::Linear(LinearModel { coefficients, intercept }))
}

/// Random-forest settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or hold a single row.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    /// Features tried per split; `None` means `ceil(sqrt(p))`.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: None, bootstrap: true, max_features: None, seed: 0 }
    }
}

const UNLIMITED_DEPTH: usize = 64;

/// Bagged variance-reduction trees. A CART split maximizing SSE reduction is
/// the second-order split with `g = −y·w`, `h = w`, `λ = γ = 0`, where `w` is
/// the bootstrap multiplicity, and its leaf weight `−G/H` is the leaf mean.
pub fn fit_random_forest(x: &DenseMatrix, y: &[f64], params: &ForestParams) -> Result<BaselineModel, GbdtError> {
    let (n, p) = (x.rows(), x.cols());
    if params.n_trees == 0 {
        return Err(GbdtError::InvalidParams("n_trees must be >= 1".into()));
    }
    if params.max_depth == Some(0) {
        return Err(GbdtError::InvalidParams("max_depth must be >= 1".into()));
    }
    if y.len() != n {
        return Err(GbdtError::LengthMismatch { rows: n, targets: y.len() });
    }
    if n == 0 {
        return Err(GbdtError::TooFewRows(0));
    }
    let builder = TreeBuilder::new(x);
    let growth = GrowthParams {
        max_depth: params.max_depth.unwrap_or(UNLIMITED_DEPTH),
        reg_lambda: 0.0,
        gamma: 0.0,
        min_child_weight: 1.0,
    };
    let per_node = params
        .max_features
        .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
        .clamp(1, p.max(1));
    let col_mask = vec![true; p];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trees = Vec::with_capacity(params.n_trees);

    for _ in 0..params.n_trees {
        let mut weight = vec![0.0; n];
        if params.bootstrap {
            for _ in 0..n {
                weight[rng.random_range(0..n)] += 1.0;
            }
        } else {
            weight.fill(1.0);
        }
        let rows: Vec<usize> = (0..n).filter(|&i| weight[i] > 0.0).collect();
        let grad: Vec<f64> = (0..n).map(|i| -y[i] * weight[i]).collect();
        let sampling = (per_node < p).then_some(NodeSampling { features_per_node: per_node, rng: &mut rng });
        trees.push(builder.fit(&grad, &weight, &growth, &rows, &col_mask, sampling));
    }
    Ok(BaselineModel::RandomForest(RandomForest { trees }))
}
