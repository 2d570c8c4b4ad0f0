//! One function per subcommand. Each writes its artifacts under the
//! configured artifacts directory and returns a JSON summary for stdout.

use crate::error::CliError;
use drugshap_core::clinical::{
    build_prompt, AuditSink, ClinicalReport, JsonlAuditSink, LlmClient, Provenance,
};
use drugshap_core::config::AppConfig;
use drugshap_core::dataset::synthetic::{generate, SyntheticConfig};
use drugshap_core::dataset::write_gdsc_csv;
use drugshap_core::evaluation::{boosting_curve, k_fold_cv, randomized_search, write_curve_csv};
use drugshap_core::explain::{explain_rows, global_importance, write_importance_csv, ExplanationRecord};
use drugshap_core::gbdt::fit_gbdt;
use drugshap_core::persist::{load_artifact, load_model, save_artifact, save_model, LoadedModel};
use drugshap_core::pipeline::{compare_models, load_records, prepare, PrepareOptions, PreparedData};
use drugshap_core::{EncodingSchema, HyperParams};
use serde_json::{json, Value};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const SCHEMA_FILE: &str = "schema.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const CV_FILE: &str = "cv.json";
pub const AUDIT_FILE: &str = "llm_audit.jsonl";

/// Resolved configuration shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: AppConfig,
    pub config_hash: String,
}

impl Context {
    pub fn new(config: AppConfig) -> Result<Self, CliError> {
        config.validate()?;
        let config_hash = config.hash();
        Ok(Self { config, config_hash })
    }

    /// Config file (or defaults) with `DRUGSHAP_*` overrides from `lookup`.
    pub fn load(path: Option<&Path>, lookup: impl Fn(&str) -> Option<String>) -> Result<Self, CliError> {
        let mut config = match path {
            Some(p) => AppConfig::load(p)?,
            None => AppConfig::default(),
        };
        config.apply_overrides(lookup)?;
        Self::new(config)
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.config.artifacts_dir.join(name)
    }

    fn ensure_artifacts_dir(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.config.artifacts_dir)?;
        if let Some(parent) = self.config.model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(())
    }

    pub fn prepared(&self) -> Result<PreparedData, CliError> {
        let records = load_records(&self.config.data_path, &self.config.csv_columns).map_err(|e| {
            CliError::new("dataset", format!("{}: {e}", self.config.data_path.display()))
        })?;
        Ok(prepare(&records, &PrepareOptions::from_config(&self.config))?)
    }

    /// Hyperparameters from a `tune` output file, or the configured ones.
    pub fn params(&self, file: Option<&Path>) -> Result<HyperParams, CliError> {
        match file {
            Some(p) => Ok(load_artifact::<HyperParams>("hyper_params", p)?.data),
            None => Ok(self.config.params.clone()),
        }
    }

    fn write_csv_file(&self, name: &str, f: impl FnOnce(BufWriter<File>) -> Result<(), CliError>) -> Result<PathBuf, CliError> {
        let path = self.artifact(name);
        f(BufWriter::new(File::create(&path)?))?;
        Ok(path)
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn ingest(ctx: &Context) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let cleaned = ctx.write_csv_file("cleaned.csv", |w| Ok(write_gdsc_csv(&data.cleaned, w)?))?;
    let features = ctx.write_csv_file("features.csv", |w| Ok(data.features.write_csv(w, &data.target)?))?;
    save_artifact("encoding_schema", &ctx.config_hash, &data.schema, ctx.artifact(SCHEMA_FILE))?;
    save_artifact("clean_summary", &ctx.config_hash, &data.clean_summary, ctx.artifact("clean_summary.json"))?;
    Ok(json!({
        "records_in": data.records_in,
        "records_after_filter": data.records_after_filter,
        "records_after_cleaning": data.cleaned.len(),
        "features": data.features.feature_names.len(),
        "dropped_columns": data.schema.dropped_columns,
        "artifacts": [path_str(&cleaned), path_str(&features), path_str(&ctx.artifact(SCHEMA_FILE))],
    }))
}

pub fn train(ctx: &Context, params_file: Option<&Path>) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let params = ctx.params(params_file)?;
    let c = &ctx.config;
    let (model, comparison) = compare_models(&data.split, &params, &c.forest, c.ridge_epsilon)?;
    let sha = save_model(&model, &ctx.config_hash, &c.model_path)?;
    save_artifact("encoding_schema", &ctx.config_hash, &data.schema, ctx.artifact(SCHEMA_FILE))?;
    let test = comparison.get("gbdt").cloned().expect("gbdt score present");
    let metrics = json!({
        "model_sha256": sha,
        "train_rows": data.split.train.y.len(),
        "test_rows": data.split.test.y.len(),
        "params": params,
        "test": test,
        "comparison": comparison.scores,
    });
    save_artifact("training_metrics", &ctx.config_hash, &metrics, ctx.artifact(METRICS_FILE))?;
    Ok(json!({
        "model_path": path_str(&c.model_path),
        "model_sha256": sha,
        "r2": test.r2,
        "mae": test.mae,
        "mse": test.mse,
        "rmse": test.rmse,
        "comparison": comparison.scores,
    }))
}

pub struct TuneOptions {
    pub n_iter: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
}

pub fn tune(ctx: &Context, opts: &TuneOptions) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let s = &ctx.config.search;
    let train = &data.split.train;
    let result = randomized_search(
        &train.x.values,
        &train.y,
        &train.x.feature_names,
        &s.space,
        &ctx.config.params,
        opts.n_iter.unwrap_or(s.n_iter),
        opts.k.unwrap_or(s.k),
        opts.seed.unwrap_or(s.seed),
    )?;
    let trials = ctx.write_csv_file("trials.csv", |w| Ok(result.write_csv(w)?))?;
    save_artifact("search_result", &ctx.config_hash, &result, ctx.artifact("search.json"))?;
    let best = ctx.artifact("best_params.json");
    save_artifact("hyper_params", &ctx.config_hash, &result.best_params, &best)?;
    Ok(json!({
        "best_index": result.best_index,
        "best_score": result.best_score,
        "best_params": result.best_params,
        "trials": result.trials.len(),
        "artifacts": [path_str(&trials), path_str(&best)],
    }))
}

pub fn evaluate(ctx: &Context, k: Option<usize>, params_file: Option<&Path>) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let params = ctx.params(params_file)?;
    let names = &data.features.feature_names;
    let report = k_fold_cv(
        &data.features.values,
        &data.target,
        k.unwrap_or(ctx.config.cv.k),
        |x, y| fit_gbdt(x, y, names, &params),
        ctx.config.cv.seed,
    )?;
    let csv = ctx.write_csv_file("cv.csv", |w| Ok(report.write_csv(w)?))?;
    save_artifact("cv_report", &ctx.config_hash, &report, ctx.artifact(CV_FILE))?;
    let folds: Vec<Value> = report
        .fold_metrics
        .iter()
        .enumerate()
        .map(|(i, m)| json!({ "fold": i + 1, "r2": m.r2, "mae": m.mae, "mse": m.mse, "rmse": m.rmse }))
        .collect();
    Ok(json!({
        "k": report.k,
        "folds": folds,
        "mean": report.mean_metrics,
        "r2_std": report.r2_std,
        "artifacts": [path_str(&csv), path_str(&ctx.artifact(CV_FILE))],
    }))
}

pub fn curve(ctx: &Context, params_file: Option<&Path>) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let mut params = ctx.params(params_file)?;
    if let Some(lr) = ctx.config.curve.learning_rate {
        params.learning_rate = lr;
    }
    let (train, test) = (&data.split.train, &data.split.test);
    let points = boosting_curve(
        &train.x.values,
        &train.y,
        &test.x.values,
        &test.y,
        &train.x.feature_names,
        &ctx.config.curve.counts,
        &params,
    )?;
    let csv = ctx.write_csv_file("curve.csv", |w| Ok(write_curve_csv(&points, w)?))?;
    save_artifact("boosting_curve", &ctx.config_hash, &points, ctx.artifact("curve.json"))?;
    Ok(json!({ "learning_rate": params.learning_rate, "points": points, "artifacts": [path_str(&csv)] }))
}

fn load_matching_model(ctx: &Context, data: &PreparedData) -> Result<LoadedModel, CliError> {
    let loaded = load_model(&ctx.config.model_path)
        .map_err(|e| CliError::new("artifact", format!("{}: {e}", ctx.config.model_path.display())))?;
    if loaded.model.feature_names != data.features.feature_names {
        return Err(CliError::new("artifact", "model features do not match the encoded dataset; retrain"));
    }
    Ok(loaded)
}

pub fn explain(ctx: &Context, limit: Option<usize>) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let loaded = load_matching_model(ctx, &data)?;
    let test = &data.split.test.x;
    let rows: Vec<usize> = (0..limit.unwrap_or(test.rows()).min(test.rows())).collect();
    let subset = test.select_rows(&rows);
    let explanations = explain_rows(&loaded.model, &subset)?;
    let records: Vec<ExplanationRecord> = explanations
        .iter()
        .zip(subset.values.iter_rows())
        .map(|(e, x)| ExplanationRecord::new(e, &subset.feature_names, x))
        .collect();
    let importance = global_importance(&explanations, &subset.feature_names)?;
    save_artifact("explanations", &ctx.config_hash, &records, ctx.artifact("explanations.json"))?;
    save_artifact("global_importance", &ctx.config_hash, &importance, ctx.artifact("importance.json"))?;
    let csv = ctx.write_csv_file("importance.csv", |w| Ok(write_importance_csv(&importance, w)?))?;
    let worst = explanations.iter().map(|e| e.additivity_error()).fold(0.0f64, f64::max);
    Ok(json!({
        "rows": records.len(),
        "max_additivity_error": worst,
        "top_features": importance.ranking.iter().take(ctx.config.top_k).collect::<Vec<_>>(),
        "artifacts": [path_str(&ctx.artifact("explanations.json")), path_str(&csv)],
    }))
}

/// Clinical report for one test-split row; `summarize` calls the LLM.
pub fn report(ctx: &Context, row: usize, summarize: bool) -> Result<Value, CliError> {
    ctx.ensure_artifacts_dir()?;
    let data = ctx.prepared()?;
    let loaded = load_matching_model(ctx, &data)?;
    let test = &data.split.test.x;
    if row >= test.rows() {
        return Err(CliError::new("invalid_argument", format!("row {row} outside the {} test rows", test.rows())));
    }
    let subset = test.select_rows(&[row]);
    let explanation = explain_rows(&loaded.model, &subset)?.remove(0);
    let source = &data.cleaned[subset.row_ids[0].index];
    let drug = source.drug_name.clone().unwrap_or_default();
    let mut report = ClinicalReport::from_explanation(
        &drug,
        &explanation,
        &subset.feature_names,
        ctx.config.resistance_threshold,
        ctx.config.top_k,
        Provenance::now(loaded.file_sha256.clone()),
    )?;
    if summarize {
        let prompt = build_prompt(&report)?;
        let audit: Arc<dyn AuditSink> = Arc::new(JsonlAuditSink::open(ctx.artifact(AUDIT_FILE))?);
        let client = LlmClient::from_env(ctx.config.llm.clone(), audit)?;
        report.summary_text = Some(client.summarize(&prompt)?.text);
    }
    let path = ctx.artifact(&format!("report_row{row}.json"));
    save_artifact("clinical_report", &ctx.config_hash, &report, &path)?;
    Ok(serde_json::to_value(&report)?)
}

pub fn synth(out: &Path, seed: u64, mini: bool) -> Result<Value, CliError> {
    let config = if mini { SyntheticConfig::mini(seed) } else { SyntheticConfig { seed, ..Default::default() } };
    let records = generate(&config);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_gdsc_csv(&records, BufWriter::new(File::create(out)?))?;
    Ok(json!({ "rows": records.len(), "path": path_str(out), "seed": seed }))
}

/// The schema written by `ingest` or `train`.
pub fn load_schema(ctx: &Context) -> Result<EncodingSchema, CliError> {
    let path = ctx.artifact(SCHEMA_FILE);
    load_artifact::<EncodingSchema>("encoding_schema", &path)
        .map(|a| a.data)
        .map_err(|e| CliError::new("artifact", format!("{}: {e}", path.display())))
}
