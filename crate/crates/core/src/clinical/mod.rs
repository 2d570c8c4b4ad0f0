//! Sensitivity classification, clinician-facing report assembly and the
//! chat-completion client that drafts summary text.

mod audit;
mod llm;
mod prompt;

pub use audit::{AuditEntry, AuditSink, JsonlAuditSink, MemoryAuditSink, NullAuditSink};
pub use llm::{request_summary, ApiKey, AttemptRecord, LlmClient, LlmClientConfig, LlmError, SummaryResponse};
pub use prompt::build_prompt;

use crate::dataset::RowId;
use crate::explain::{top_k_features, ShapExplanation};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_RESISTANCE_THRESHOLD: f64 = 4.0;

#[derive(Debug, Error)]
pub enum ClinicalError {
    #[error("non-finite input {0}")]
    NonFiniteInput(f64),
    #[error("incomplete report: {0}")]
    IncompleteReport(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseLabel {
    Sensitive,
    Resistant,
}

impl std::fmt::Display for ResponseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResponseLabel::Sensitive => "Sensitive",
            ResponseLabel::Resistant => "Resistant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseClass {
    pub label: ResponseLabel,
    pub threshold: f64,
    pub ln_ic50: f64,
}

/// Resistant exactly when `ln_ic50 > threshold`.
pub fn classify_response(ln_ic50: f64, threshold: f64) -> Result<ResponseClass, ClinicalError> {
    for v in [ln_ic50, threshold] {
        if !v.is_finite() {
            return Err(ClinicalError::NonFiniteInput(v));
        }
    }
    let label = if ln_ic50 > threshold { ResponseLabel::Resistant } else { ResponseLabel::Sensitive };
    Ok(ResponseClass { label, threshold, ln_ic50 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopFeature {
    pub feature: String,
    pub shap: f64,
}

/// Which model produced a report, and when.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_sha256: String,
    pub generated_at: String,
}

impl Provenance {
    pub fn now(model_sha256: impl Into<String>) -> Self {
        Self {
            model_sha256: model_sha256.into(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClinicalReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_id: Option<RowId>,
    pub drug_name: String,
    pub predicted_ln_ic50: f64,
    pub response: ResponseClass,
    pub top_features: Vec<TopFeature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_text: Option<String>,
    pub provenance: Provenance,
}

impl ClinicalReport {
    /// Report draft (no summary yet) from one explanation.
    pub fn from_explanation(
        drug_name: &str,
        explanation: &ShapExplanation,
        feature_names: &[String],
        threshold: f64,
        top_k: usize,
        provenance: Provenance,
    ) -> Result<Self, ClinicalError> {
        let response = classify_response(explanation.prediction, threshold)?;
        let top_features = top_k_features(explanation, feature_names, top_k)
            .into_iter()
            .map(|(feature, shap)| TopFeature { feature, shap })
            .collect();
        Ok(Self {
            row_id: explanation.row_id.clone(),
            drug_name: drug_name.to_string(),
            predicted_ln_ic50: explanation.prediction,
            response,
            top_features,
            summary_text: None,
            provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strict_threshold() {
        assert_eq!(classify_response(4.1, 4.0).unwrap().label, ResponseLabel::Resistant);
        assert_eq!(classify_response(4.0, 4.0).unwrap().label, ResponseLabel::Sensitive);
        assert_eq!(classify_response(-1.0, 4.0).unwrap().label, ResponseLabel::Sensitive);
        assert!(matches!(classify_response(f64::NAN, 4.0), Err(ClinicalError::NonFiniteInput(_))));
        assert!(classify_response(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn report_from_explanation() {
        let e = ShapExplanation { row_id: None, base_value: 3.0, contributions: vec![0.5, -2.0, 1.0], prediction: 2.5 };
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let r = ClinicalReport::from_explanation("Drug", &e, &names, 4.0, 5, Provenance::now("abc")).unwrap();
        assert_eq!(r.top_features.len(), 3);
        assert_eq!(r.top_features[0], TopFeature { feature: "b".into(), shap: -2.0 });
        assert_eq!(r.response.label, ResponseLabel::Sensitive);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("summary_text").is_none());
        assert_eq!(json["response"]["label"], "Sensitive");
    }

    proptest! {
        #[test]
        fn monotone(a in -20.0..20.0f64, b in -20.0..20.0f64, t in -5.0..10.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if classify_response(lo, t).unwrap().label == ResponseLabel::Resistant {
                prop_assert_eq!(classify_response(hi, t).unwrap().label, ResponseLabel::Resistant);
            }
        }
    }
}
