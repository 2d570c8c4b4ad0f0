//! Application configuration: a JSON file plus environment overrides.

use crate::clinical::{LlmClientConfig, DEFAULT_RESISTANCE_THRESHOLD};
use crate::dataset::{SchemaConfig, DEFAULT_MISSING_THRESHOLD};
use crate::evaluation::ParamSpace;
use crate::explain::DEFAULT_TOP_K;
use crate::gbdt::{ForestParams, HyperParams};
use crate::persist::sha256_hex;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("invalid value {value:?} for {var}")]
    BadOverride { var: String, value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub space: ParamSpace,
    pub n_iter: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { space: ParamSpace::default(), n_iter: 20, k: 5, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 5, seed: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveConfig {
    pub counts: Vec<usize>,
    /// Learning rate for the curve; `None` keeps the training learning rate.
    /// Defaults to 0.1 so the early counts show the underfit regime.
    pub learning_rate: Option<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self { counts: vec![50, 100, 150, 200, 250], learning_rate: Some(0.1) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    /// Built web UI bundle served under `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { bind: "127.0.0.1".into(), port: 8080, static_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub data_path: PathBuf,
    pub csv_columns: SchemaConfig,
    pub subtypes: Vec<String>,
    pub missing_threshold: f64,
    /// Keep Z_SCORE as a feature instead of dropping it with AUC.
    pub keep_z_score: bool,
    pub test_fraction: f64,
    pub split_seed: u64,
    /// Hyperparameters for `train`, and the base that search samples override.
    pub params: HyperParams,
    pub search: SearchConfig,
    pub cv: CvConfig,
    pub curve: CurveConfig,
    pub forest: ForestParams,
    pub ridge_epsilon: f64,
    pub resistance_threshold: f64,
    pub top_k: usize,
    pub llm: LlmClientConfig,
    pub server: ServerConfig,
    pub artifacts_dir: PathBuf,
    pub model_path: PathBuf,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            data_path: PathBuf::from("data/GDSC_DATASET.csv"),
            csv_columns: SchemaConfig::default(),
            subtypes: vec!["LUAD".into(), "LUSC".into()],
            missing_threshold: DEFAULT_MISSING_THRESHOLD,
            keep_z_score: false,
            test_fraction: 0.2,
            split_seed: 42,
            params: HyperParams::default(),
            search: SearchConfig::default(),
            cv: CvConfig::default(),
            curve: CurveConfig::default(),
            forest: ForestParams::default(),
            ridge_epsilon: 1e-8,
            resistance_threshold: DEFAULT_RESISTANCE_THRESHOLD,
            top_k: DEFAULT_TOP_K,
            llm: LlmClientConfig::default(),
            server: ServerConfig::default(),
            artifacts_dir: PathBuf::from("artifacts"),
            model_path: PathBuf::from("artifacts/model.json"),
        }
    }
}

/// Environment variables read by [`AppConfig::apply_overrides`].
pub const ENV_OVERRIDES: [&str; 8] = [
    "DRUGSHAP_DATA",
    "DRUGSHAP_MODEL",
    "DRUGSHAP_ARTIFACTS",
    "DRUGSHAP_BIND",
    "DRUGSHAP_PORT",
    "DRUGSHAP_STATIC_DIR",
    "DRUGSHAP_LLM_ENDPOINT",
    "DRUGSHAP_LLM_MODEL",
];

impl AppConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: AppConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form; stamped into every artifact.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    /// Apply `DRUGSHAP_*` overrides looked up through `lookup`.
    pub fn apply_overrides(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        let get = |k: &str| lookup(k).filter(|v| !v.is_empty());
        if let Some(v) = get("DRUGSHAP_DATA") {
            self.data_path = v.into();
        }
        if let Some(v) = get("DRUGSHAP_MODEL") {
            self.model_path = v.into();
        }
        if let Some(v) = get("DRUGSHAP_ARTIFACTS") {
            self.artifacts_dir = v.into();
        }
        if let Some(v) = get("DRUGSHAP_BIND") {
            self.server.bind = v;
        }
        if let Some(v) = get("DRUGSHAP_PORT") {
            self.server.port =
                v.parse().map_err(|_| ConfigError::BadOverride { var: "DRUGSHAP_PORT".into(), value: v.clone() })?;
        }
        if let Some(v) = get("DRUGSHAP_STATIC_DIR") {
            self.server.static_dir = Some(v.into());
        }
        if let Some(v) = get("DRUGSHAP_LLM_ENDPOINT") {
            self.llm.endpoint = v;
        }
        if let Some(v) = get("DRUGSHAP_LLM_MODEL") {
            self.llm.model = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.data_path.as_os_str().is_empty()
            || self.model_path.as_os_str().is_empty()
            || self.artifacts_dir.as_os_str().is_empty()
        {
            return bad("paths must be non-empty");
        }
        if self.subtypes.is_empty() {
            return bad("subtypes must list at least one code");
        }
        if !(self.missing_threshold > 0.0 && self.missing_threshold < 1.0) {
            return bad("missing_threshold must lie in (0, 1)");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction must lie in (0, 1)");
        }
        if self.search.n_iter == 0 || self.search.k < 2 || self.cv.k < 2 {
            return bad("search.n_iter must be >= 1 and every k >= 2");
        }
        if self.top_k == 0 || !self.resistance_threshold.is_finite() || !(self.ridge_epsilon >= 0.0) {
            return bad("top_k must be >= 1, resistance_threshold finite and ridge_epsilon >= 0");
        }
        if self.curve.counts.is_empty() || self.curve.counts[0] == 0 || self.curve.counts.windows(2).any(|w| w[0] >= w[1]) {
            return bad("curve.counts must be strictly increasing positive counts");
        }
        self.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.search.space.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.llm.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}
