//! Exact Shapley attributions for boosted tree ensembles.
//!
//! Attributions use the path-dependent game: for a feature subset `S`,
//! `v(S)` descends known splits along `x` and averages unknown ones by node
//! cover. [`tree_shap`] computes it in polynomial time; [`brute_force_shap`]
//! enumerates subsets and serves as its oracle.

mod brute;
mod summary;
mod treeshap;

pub use summary::{
    global_importance, grouped_contributions, top_k_features, waterfall, write_importance_csv, ExplanationRecord,
    FeatureContribution, FeatureImportance, GlobalImportance, Waterfall, WaterfallStep, DEFAULT_TOP_K,
};

use crate::dataset::{FeatureMatrix, RowId};
use crate::gbdt::GbdtModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest feature count accepted by [`brute_force_shap`].
pub const BRUTE_FORCE_MAX_FEATURES: usize = 20;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{features} features exceeds the brute-force limit of {limit}")]
    TooManyFeatures { features: usize, limit: usize },
    #[error("no explanations given")]
    EmptyInput,
    #[error("explanations disagree on the feature space")]
    MisalignedFeatures,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Attribution of one prediction: `base_value + Σ contributions = prediction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    pub row_id: Option<RowId>,
    pub base_value: f64,
    pub contributions: Vec<f64>,
    pub prediction: f64,
}

impl ShapExplanation {
    /// `|base + Σφ − prediction|`.
    pub fn additivity_error(&self) -> f64 {
        (self.base_value + self.contributions.iter().sum::<f64>() - self.prediction).abs()
    }
}

/// `v(∅)`: base score plus the cover-weighted mean output of every tree.
pub fn expected_value(model: &GbdtModel) -> f64 {
    model.base_score + model.learning_rate() * model.trees.iter().map(|t| t.expected_value()).sum::<f64>()
}

fn check_dims(model: &GbdtModel, x: &[f64]) -> Result<(), ExplainError> {
    if x.len() != model.n_features() {
        return Err(ExplainError::DimensionMismatch { expected: model.n_features(), got: x.len() });
    }
    Ok(())
}

/// Exact SHAP values in `O(trees · leaves · depth²)`.
pub fn tree_shap(model: &GbdtModel, x: &[f64]) -> Result<ShapExplanation, ExplainError> {
    check_dims(model, x)?;
    let mut phi = vec![0.0; model.n_features()];
    for tree in &model.trees {
        treeshap::accumulate(tree, x, model.learning_rate(), &mut phi);
    }
    Ok(ShapExplanation {
        row_id: None,
        base_value: expected_value(model),
        contributions: phi,
        prediction: model.predict_prefix(x, model.trees.len()),
    })
}

/// SHAP values by enumerating all `2^p` feature subsets.
pub fn brute_force_shap(model: &GbdtModel, x: &[f64]) -> Result<ShapExplanation, ExplainError> {
    check_dims(model, x)?;
    let p = model.n_features();
    if p > BRUTE_FORCE_MAX_FEATURES {
        return Err(ExplainError::TooManyFeatures { features: p, limit: BRUTE_FORCE_MAX_FEATURES });
    }
    let values = brute::game_values(model, x);
    Ok(ShapExplanation {
        row_id: None,
        base_value: values[0],
        contributions: brute::shapley_from_game(&values, p),
        prediction: model.predict_prefix(x, model.trees.len()),
    })
}

/// `tree_shap` for every row, tagged with its provenance, in row order.
pub fn explain_rows(model: &GbdtModel, x: &FeatureMatrix) -> Result<Vec<ShapExplanation>, ExplainError> {
    x.values
        .iter_rows()
        .zip(&x.row_ids)
        .map(|(row, id)| tree_shap(model, row).map(|e| ShapExplanation { row_id: Some(id.clone()), ..e }))
        .collect()
}
