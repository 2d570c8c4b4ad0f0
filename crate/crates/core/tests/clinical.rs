use drugshap_core::clinical::{build_prompt, ClinicalReport, Provenance, ResponseLabel};
use drugshap_core::ShapExplanation;
use std::path::PathBuf;

fn report() -> ClinicalReport {
    let names: Vec<String> =
        ["DRUG_NAME=Erlotinib", "TARGET_PATHWAY=EGFR signaling", "MSI=MSI-H", "GROWTH_PROPERTIES=Adherent", "CNA=Y", "METHYLATION=N"]
            .map(String::from)
            .to_vec();
    let expl = ShapExplanation {
        row_id: None,
        base_value: 2.5,
        contributions: vec![1.25, 0.5, -0.125, 0.0625, 0.0, -0.03125],
        prediction: 2.5 + 1.25 + 0.5 - 0.125 + 0.0625 - 0.03125,
    };
    let provenance = Provenance { model_sha256: "ab".repeat(32), generated_at: "2026-01-01T00:00:00Z".into() };
    ClinicalReport::from_explanation("Erlotinib", &expl, &names, 4.0, 5, provenance).unwrap()
}

#[test]
fn prompt_matches_golden_file() {
    let r = report();
    assert_eq!(r.response.label, ResponseLabel::Resistant);
    let prompt = build_prompt(&r).unwrap();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/prompt.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &prompt).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden prompt; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(prompt, golden);
}

#[test]
fn report_json_shape() {
    let v = serde_json::to_value(report()).unwrap();
    assert_eq!(v["drug_name"], "Erlotinib");
    assert_eq!(v["response"]["label"], "Resistant");
    assert_eq!(v["top_features"].as_array().unwrap().len(), 5);
    assert_eq!(v["top_features"][0]["feature"], "DRUG_NAME=Erlotinib");
    assert!(v.get("summary_text").is_none() && v.get("row_id").is_none());
    assert_eq!(v["provenance"]["model_sha256"].as_str().unwrap().len(), 64);
}
