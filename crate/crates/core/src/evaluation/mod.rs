//! Regression metrics, k-fold cross-validation, randomized hyperparameter
//! search and the boosting-rounds curve.

mod curve;
mod cv;
mod metrics;
mod search;

pub use curve::{boosting_curve, write_curve_csv, CurvePoint};
pub use cv::{fold_assignments, k_fold_cv, CvReport};
pub use metrics::{regression_metrics, Metrics};
pub use search::{randomized_search, ParamName, ParamSpace, ParamSpec, SearchResult, Trial};

use crate::gbdt::GbdtError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("target has zero variance; R² is undefined")]
    ZeroVarianceTarget,
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("{rows} rows cannot be split into {k} folds")]
    TooFewRows { rows: usize, k: usize },
    #[error("parameter space is empty")]
    EmptySpace,
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),
    #[error("invalid curve counts: {0}")]
    InvalidCounts(String),
    #[error(transparent)]
    Model(#[from] GbdtError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
