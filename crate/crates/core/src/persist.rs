//! Versioned, checksummed JSON artifacts.
//!
//! A model file is a JSON object whose last field, `checksum`, is the SHA-256
//! of the compact serialization of all preceding fields. Floats serialize
//! with round-trip precision, so a loaded model predicts bit-identically.

use crate::gbdt::{GbdtModel, HyperParams, RegressionTree};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("unsupported format_version {found} (this build reads {supported})")]
    UnsupportedVersion { found: u64, supported: u32 },
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("expected a {expected:?} artifact, found {found:?}")]
    WrongKind { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct ModelBodyRef<'a> {
    format_version: u32,
    config_hash: &'a str,
    params: &'a HyperParams,
    feature_names: &'a [String],
    base_score: f64,
    training_rows: usize,
    trees: &'a [RegressionTree],
}

#[derive(Serialize)]
struct ModelFileRef<'a> {
    #[serde(flatten)]
    body: ModelBodyRef<'a>,
    checksum: String,
}

#[derive(Deserialize)]
struct ModelFile {
    format_version: u32,
    config_hash: String,
    params: HyperParams,
    feature_names: Vec<String>,
    base_score: f64,
    training_rows: usize,
    trees: Vec<RegressionTree>,
    checksum: String,
}

/// A model read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub model: GbdtModel,
    pub config_hash: String,
    /// SHA-256 of the file bytes.
    pub file_sha256: String,
}

fn body_checksum(body: &ModelBodyRef<'_>) -> String {
    sha256_hex(&serde_json::to_vec(body).expect("model body serializes"))
}

/// Serialize `model` to the model-file text.
pub fn model_to_string(model: &GbdtModel, config_hash: &str) -> String {
    let body = ModelBodyRef {
        format_version: FORMAT_VERSION,
        config_hash,
        params: &model.params,
        feature_names: &model.feature_names,
        base_score: model.base_score,
        training_rows: model.training_rows,
        trees: &model.trees,
    };
    let checksum = body_checksum(&body);
    let mut text = serde_json::to_string_pretty(&ModelFileRef { body, checksum }).expect("model serializes");
    text.push('\n');
    text
}

fn check_version(v: &Value) -> Result<(), PersistError> {
    match v.get("format_version").and_then(Value::as_u64) {
        Some(found) if found == u64::from(FORMAT_VERSION) => Ok(()),
        Some(found) => Err(PersistError::UnsupportedVersion { found, supported: FORMAT_VERSION }),
        None => Err(PersistError::CorruptFile("missing format_version".into())),
    }
}

pub fn model_from_str(text: &str) -> Result<(GbdtModel, String), PersistError> {
    let value: Value = serde_json::from_str(text).map_err(|e| PersistError::CorruptFile(e.to_string()))?;
    check_version(&value)?;
    let file: ModelFile = serde_json::from_value(value).map_err(|e| PersistError::CorruptFile(e.to_string()))?;
    let body = ModelBodyRef {
        format_version: file.format_version,
        config_hash: &file.config_hash,
        params: &file.params,
        feature_names: &file.feature_names,
        base_score: file.base_score,
        training_rows: file.training_rows,
        trees: &file.trees,
    };
    if body_checksum(&body) != file.checksum {
        return Err(PersistError::CorruptFile("checksum mismatch".into()));
    }
    for (i, t) in file.trees.iter().enumerate() {
        t.validate().map_err(|e| PersistError::CorruptFile(format!("tree {i}: {e}")))?;
        if t.split_features().any(|f| f >= file.feature_names.len()) {
            return Err(PersistError::CorruptFile(format!("tree {i} references an unknown feature")));
        }
    }
    let model = GbdtModel {
        params: file.params,
        feature_names: file.feature_names,
        base_score: file.base_score,
        training_rows: file.training_rows,
        trees: file.trees,
    };
    Ok((model, file.config_hash))
}

/// Write the model file and return the SHA-256 of its bytes.
pub fn save_model(model: &GbdtModel, config_hash: &str, path: impl AsRef<Path>) -> Result<String, PersistError> {
    let text = model_to_string(model, config_hash);
    std::fs::write(path, &text)?;
    Ok(sha256_hex(text.as_bytes()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LoadedModel, PersistError> {
    let bytes = std::fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| PersistError::CorruptFile(e.to_string()))?;
    let (model, config_hash) = model_from_str(text)?;
    Ok(LoadedModel { model, config_hash, file_sha256: sha256_hex(&bytes) })
}

/// Envelope for every other JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub format_version: u32,
    pub config_hash: String,
    pub kind: String,
    pub data: T,
}

pub fn artifact_to_string<T: Serialize>(kind: &str, config_hash: &str, data: &T) -> String {
    let a = Artifact { format_version: FORMAT_VERSION, config_hash: config_hash.to_string(), kind: kind.to_string(), data };
    let mut text = serde_json::to_string_pretty(&a).expect("artifact serializes");
    text.push('\n');
    text
}

pub fn save_artifact<T: Serialize>(
    kind: &str,
    config_hash: &str,
    data: &T,
    path: impl AsRef<Path>,
) -> Result<(), PersistError> {
    std::fs::write(path, artifact_to_string(kind, config_hash, data))?;
    Ok(())
}

pub fn load_artifact<T: DeserializeOwned>(kind: &str, path: impl AsRef<Path>) -> Result<Artifact<T>, PersistError> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| PersistError::CorruptFile(e.to_string()))?;
    check_version(&value)?;
    let a: Artifact<T> = serde_json::from_value(value).map_err(|e| PersistError::CorruptFile(e.to_string()))?;
    if a.kind != kind {
        return Err(PersistError::WrongKind { expected: kind.to_string(), found: a.kind });
    }
    Ok(a)
}
