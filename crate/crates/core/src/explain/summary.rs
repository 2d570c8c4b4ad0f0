//! Rankings, waterfalls and exports built from explanations.

use super::{ExplainError, ShapExplanation};
use crate::dataset::RowId;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io::Write;

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean_abs_shap: f64,
}

/// Features ranked by mean |φ|, largest first, ties by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub ranking: Vec<FeatureImportance>,
}

fn by_magnitude_then_name(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(b.0))
}

pub fn global_importance(
    explanations: &[ShapExplanation],
    feature_names: &[String],
) -> Result<GlobalImportance, ExplainError> {
    if explanations.is_empty() {
        return Err(ExplainError::EmptyInput);
    }
    if explanations.iter().any(|e| e.contributions.len() != feature_names.len()) {
        return Err(ExplainError::MisalignedFeatures);
    }
    let n = explanations.len() as f64;
    let mut ranking: Vec<FeatureImportance> = feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| FeatureImportance {
            feature: name.clone(),
            mean_abs_shap: explanations.iter().map(|e| e.contributions[j].abs()).sum::<f64>() / n,
        })
        .collect();
    ranking.sort_by(|a, b| by_magnitude_then_name((&a.feature, a.mean_abs_shap), (&b.feature, b.mean_abs_shap)));
    Ok(GlobalImportance { ranking })
}

/// CSV with columns `feature, mean_abs_shap`.
pub fn write_importance_csv<W: Write>(importance: &GlobalImportance, out: W) -> Result<(), ExplainError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "mean_abs_shap"])?;
    for f in &importance.ranking {
        w.write_record([f.feature.clone(), f.mean_abs_shap.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// The `k` largest-magnitude signed contributions (all of them if `k`
/// exceeds the feature count), ties by name.
pub fn top_k_features(explanation: &ShapExplanation, feature_names: &[String], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> =
        feature_names.iter().cloned().zip(explanation.contributions.iter().copied()).collect();
    all.sort_by(|a, b| by_magnitude_then_name((&a.0, a.1), (&b.0, b.1)));
    all.truncate(k);
    all
}

/// Sum of contributions per source column, merging one-hot groups
/// (`COLUMN=level`) and keeping first-appearance order.
pub fn grouped_contributions(explanation: &ShapExplanation, feature_names: &[String]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for (name, &phi) in feature_names.iter().zip(&explanation.contributions) {
        let group = name.split_once('=').map_or(name.as_str(), |(c, _)| c);
        match out.iter_mut().find(|(g, _)| g == group) {
            Some((_, total)) => *total += phi,
            None => out.push((group.to_string(), phi)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallStep {
    pub feature: String,
    pub value: f64,
    pub shap: f64,
    /// Running total after adding this step, starting from the base value.
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waterfall {
    pub base_value: f64,
    pub prediction: f64,
    pub steps: Vec<WaterfallStep>,
}

/// Non-zero contributions in descending |φ| with running totals from the
/// base value; the final cumulative equals `base + Σφ`.
pub fn waterfall(explanation: &ShapExplanation, feature_names: &[String], x: &[f64]) -> Waterfall {
    let mut order: Vec<usize> = (0..feature_names.len()).filter(|&j| explanation.contributions[j] != 0.0).collect();
    order.sort_by(|&a, &b| {
        by_magnitude_then_name(
            (&feature_names[a], explanation.contributions[a]),
            (&feature_names[b], explanation.contributions[b]),
        )
    });
    let mut running = explanation.base_value;
    let steps = order
        .into_iter()
        .map(|j| {
            running += explanation.contributions[j];
            WaterfallStep {
                feature: feature_names[j].clone(),
                value: x[j],
                shap: explanation.contributions[j],
                cumulative: running,
            }
        })
        .collect();
    Waterfall { base_value: explanation.base_value, prediction: explanation.prediction, steps }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureContribution {
    pub feature: String,
    pub value: f64,
    pub shap: f64,
}

/// Serialized form of one explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub row_id: Option<RowId>,
    pub prediction: f64,
    pub base_value: f64,
    pub contributions: Vec<FeatureContribution>,
}

impl ExplanationRecord {
    pub fn new(explanation: &ShapExplanation, feature_names: &[String], x: &[f64]) -> Self {
        let contributions = feature_names
            .iter()
            .zip(x)
            .zip(&explanation.contributions)
            .map(|((f, &value), &shap)| FeatureContribution { feature: f.clone(), value, shap })
            .collect();
        Self {
            row_id: explanation.row_id.clone(),
            prediction: explanation.prediction,
            base_value: explanation.base_value,
            contributions,
        }
    }
}
