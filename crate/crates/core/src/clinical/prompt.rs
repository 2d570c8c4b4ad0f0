use super::{ClinicalError, ClinicalReport};
use std::fmt::Write;

fn direction(shap: f64) -> &'static str {
    if shap > 0.0 {
        "pushes toward resistance"
    } else if shap < 0.0 {
        "pushes toward sensitivity"
    } else {
        "no net effect"
    }
}

/// Render the summary request for a report draft.
///
/// Values are printed with four decimals. Positive attributions raise the
/// predicted LN_IC50 and therefore point toward resistance.
pub fn build_prompt(report: &ClinicalReport) -> Result<String, ClinicalError> {
    if report.drug_name.trim().is_empty() {
        return Err(ClinicalError::IncompleteReport("drug name is empty".into()));
    }
    if report.top_features.is_empty() {
        return Err(ClinicalError::IncompleteReport("no top features".into()));
    }
    if !report.predicted_ln_ic50.is_finite() {
        return Err(ClinicalError::IncompleteReport("prediction is not finite".into()));
    }
    let r = &report.response;
    let mut out = String::new();
    let _ = writeln!(out, "You are supporting an oncology team that reviews model-based drug response estimates");
    let _ = writeln!(out, "for non-small-cell lung cancer cell lines.");
    let _ = writeln!(out);
    let _ = writeln!(out, "Drug: {}", report.drug_name);
    let _ = writeln!(out, "Predicted LN_IC50: {:.4}", report.predicted_ln_ic50);
    let _ = writeln!(out, "Response class: {} (resistant when LN_IC50 > {:.4})", r.label, r.threshold);
    let _ = writeln!(out);
    let _ = writeln!(out, "Main drivers of this prediction (SHAP attributions on LN_IC50):");
    for (i, f) in report.top_features.iter().enumerate() {
        let _ = writeln!(out, "{}. {} ({}, |phi| = {:.4})", i + 1, f.feature, direction(f.shap), f.shap.abs());
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Write a short summary for a clinician with these sections:");
    let _ = writeln!(out, "1. Mechanism of action: how the drug acts and how the drivers above relate to it.");
    let _ = writeln!(out, "2. Metabolism considerations: relevant pharmacokinetic or metabolic factors.");
    let _ = writeln!(out, "3. Treatment adjustments: dosing or combination changes worth considering.");
    let _ = writeln!(out, "4. Actionable steps: concrete follow-up checks or next decisions.");
    let _ = writeln!(out, "Keep it under 250 words and state clearly where the evidence is uncertain.");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clinical::{classify_response, Provenance, TopFeature};

    fn draft(features: Vec<TopFeature>) -> ClinicalReport {
        ClinicalReport {
            row_id: None,
            drug_name: "Erlotinib".into(),
            predicted_ln_ic50: 4.123456,
            response: classify_response(4.123456, 4.0).unwrap(),
            top_features: features,
            summary_text: None,
            provenance: Provenance { model_sha256: "0".repeat(64), generated_at: "2024-01-01T00:00:00Z".into() },
        }
    }

    #[test]
    fn renders_directions_and_rounding() {
        let p = build_prompt(&draft(vec![
            TopFeature { feature: "TARGET=EGFR".into(), shap: -0.81234 },
            TopFeature { feature: "MSI=MSI-H".into(), shap: 0.2 },
        ]))
        .unwrap();
        assert!(p.contains("Predicted LN_IC50: 4.1235\n"));
        assert!(p.contains("Response class: Resistant"));
        assert!(p.contains("1. TARGET=EGFR (pushes toward sensitivity, |phi| = 0.8123)"));
        assert!(p.contains("2. MSI=MSI-H (pushes toward resistance, |phi| = 0.2000)"));
        assert_eq!(p, build_prompt(&draft(vec![
            TopFeature { feature: "TARGET=EGFR".into(), shap: -0.81234 },
            TopFeature { feature: "MSI=MSI-H".into(), shap: 0.2 },
        ])).unwrap());
    }

    #[test]
    fn incomplete_reports_are_rejected() {
        assert!(matches!(build_prompt(&draft(vec![])), Err(ClinicalError::IncompleteReport(_))));
        let mut d = draft(vec![TopFeature { feature: "a".into(), shap: 1.0 }]);
        d.drug_name = " ".into();
        assert!(build_prompt(&d).is_err());
    }
}
