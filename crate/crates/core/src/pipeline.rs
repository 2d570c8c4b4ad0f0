//! The preprocessing and model-comparison steps shared by the CLI and the
//! reproduction checks.

use crate::config::AppConfig;
use crate::dataset::{
    clean, filter_subtypes, fit_encoding, parse_gdsc, train_test_split, CleanSummary, DatasetError, DropList,
    EncodingSchema, FeatureMatrix, GdscRecord, SchemaConfig, SplitPair,
};
use crate::evaluation::{regression_metrics, EvalError, Metrics};
use crate::gbdt::{fit_gbdt, fit_linear_regression, fit_random_forest, ForestParams, GbdtModel, HyperParams, Regressor};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub subtypes: BTreeSet<String>,
    pub missing_threshold: f64,
    pub drop_list: DropList,
    pub test_fraction: f64,
    pub seed: u64,
}

impl PrepareOptions {
    pub fn from_config(c: &AppConfig) -> Self {
        Self {
            subtypes: c.subtypes.iter().cloned().collect(),
            missing_threshold: c.missing_threshold,
            drop_list: if c.keep_z_score { DropList::keeping_z_score() } else { DropList::default() },
            test_fraction: c.test_fraction,
            seed: c.split_seed,
        }
    }
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self::from_config(&AppConfig::default())
    }
}

/// Cleaned, encoded and split modeling data.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub records_in: usize,
    pub records_after_filter: usize,
    pub clean_summary: CleanSummary,
    pub cleaned: Vec<GdscRecord>,
    pub schema: EncodingSchema,
    pub features: FeatureMatrix,
    pub target: Vec<f64>,
    pub split: SplitPair,
}

pub fn load_records(path: impl AsRef<Path>, columns: &SchemaConfig) -> Result<Vec<GdscRecord>, DatasetError> {
    parse_gdsc(std::fs::File::open(path)?, columns)
}

/// Filter to the requested subtypes, clean, fit the encoding on the cleaned
/// rows, encode and split.
pub fn prepare(records: &[GdscRecord], opts: &PrepareOptions) -> Result<PreparedData, DatasetError> {
    let filtered = filter_subtypes(records, &opts.subtypes);
    if filtered.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let (cleaned, clean_summary) = clean(&filtered, opts.missing_threshold)?;
    let schema = fit_encoding(&cleaned, &clean_summary, &opts.drop_list)?;
    let (features, target) = schema.encode(&cleaned)?;
    let split = train_test_split(&features, &target, opts.test_fraction, opts.seed)?;
    Ok(PreparedData {
        records_in: records.len(),
        records_after_filter: filtered.len(),
        clean_summary,
        cleaned,
        schema,
        features,
        target,
        split,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: String,
    pub metrics: Metrics,
}

/// Test metrics of the boosted model next to the linear and forest baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scores: Vec<ModelScore>,
}

impl Comparison {
    pub fn get(&self, model: &str) -> Option<&Metrics> {
        self.scores.iter().find(|s| s.model == model).map(|s| &s.metrics)
    }
}

pub fn test_metrics<M: Regressor>(model: &M, split: &SplitPair) -> Result<Metrics, EvalError> {
    regression_metrics(&split.test.y, &model.predict_rows(&split.test.x.values))
}

/// Fit the boosted model plus both baselines on the training side and score
/// them on the test side.
pub fn compare_models(
    split: &SplitPair,
    params: &HyperParams,
    forest: &ForestParams,
    ridge_epsilon: f64,
) -> Result<(GbdtModel, Comparison), EvalError> {
    let (xt, yt) = (&split.train.x.values, &split.train.y);
    let gbdt = fit_gbdt(xt, yt, &split.train.x.feature_names, params)?;
    let linear = fit_linear_regression(xt, yt, ridge_epsilon)?;
    let rf = fit_random_forest(xt, yt, forest)?;
    let scores = vec![
        ModelScore { model: "gbdt".into(), metrics: test_metrics(&gbdt, split)? },
        ModelScore { model: "linear".into(), metrics: test_metrics(&linear, split)? },
        ModelScore { model: "random_forest".into(), metrics: test_metrics(&rf, split)? },
    ];
    Ok((gbdt, Comparison { scores }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{generate, SyntheticConfig};

    #[test]
    fn synthetic_pipeline_end_to_end() {
        let records = generate(&SyntheticConfig::mini(3));
        let data = prepare(&records, &PrepareOptions::default()).unwrap();
        assert!(data.records_after_filter < data.records_in);
        assert!(data.cleaned.iter().all(|r| matches!(r.tcga_desc.as_deref(), Some("LUAD" | "LUSC"))));
        let n = data.target.len();
        assert_eq!(data.split.test.y.len(), crate::dataset::test_size(n, 0.2));
        assert_eq!(data.split.train.y.len() + data.split.test.y.len(), n);
        assert!(!data.features.feature_names.iter().any(|f| f.starts_with("AUC") || f.starts_with("Z_SCORE")));

        let params = HyperParams { n_estimators: 40, learning_rate: 0.2, max_depth: 4, ..Default::default() };
        let forest = ForestParams { n_trees: 10, ..Default::default() };
        let (model, cmp) = compare_models(&data.split, &params, &forest, 1e-8).unwrap();
        assert_eq!(model.trees.len(), 40);
        assert_eq!(cmp.scores.len(), 3);
        assert!(cmp.get("gbdt").unwrap().r2 > 0.3);
    }

    #[test]
    fn no_matching_subtype_is_empty_input() {
        let records = generate(&SyntheticConfig::mini(3));
        let opts = PrepareOptions { subtypes: ["NOPE".to_string()].into(), ..Default::default() };
        assert!(matches!(prepare(&records, &opts), Err(DatasetError::EmptyInput)));
    }
}
