//! Reproduction checks. Each test prints one `[PASS]`/`[FAIL]` line.
//!
//! Data-dependent checks (2, 4, 5, 6, 11) read the screen named by the
//! `GDSC_CSV` environment variable and otherwise fall back to the seeded
//! synthetic screen; every line reports which one was used.
//!
//! Run with `cargo test -p drugshap-core --test acceptance -- --nocapture`.

mod common;

use common::{capture_logs, captured_logs, MockServer, Reply};
use drugshap_core::clinical::{
    classify_response, ApiKey, JsonlAuditSink, LlmClient, LlmClientConfig, LlmError, ResponseLabel,
    DEFAULT_RESISTANCE_THRESHOLD,
};
use drugshap_core::config::AppConfig;
use drugshap_core::dataset::synthetic::{generate, SyntheticConfig};
use drugshap_core::evaluation::{
    boosting_curve, fold_assignments, k_fold_cv, randomized_search, regression_metrics, SearchResult,
};
use drugshap_core::explain::{brute_force_shap, explain_rows, tree_shap};
use drugshap_core::gbdt::{fit_gbdt, fit_gbdt_observed, Node, Regressor, RoundObserver};
use drugshap_core::persist::{load_model, save_model};
use drugshap_core::pipeline::{compare_models, load_records, prepare, Comparison, PrepareOptions, PreparedData};
use drugshap_core::{DenseMatrix, GbdtModel, HyperParams, RegressionTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::{Arc, OnceLock};
use std::time::Duration;

// Search budget for the tuned model; the single-core test box rules out the
// full configured budget.
const SEARCH_ITER: usize = 10;
const SEARCH_FOLDS: usize = 3;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {n:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

struct Study {
    source: String,
    data: PreparedData,
    search: SearchResult,
    tuned: HyperParams,
    model: GbdtModel,
    comparison: Comparison,
}

fn study() -> &'static Study {
    static STUDY: OnceLock<Study> = OnceLock::new();
    STUDY.get_or_init(|| {
        let config = AppConfig::default();
        let (records, source) = match std::env::var("GDSC_CSV") {
            Ok(path) if !path.is_empty() => {
                (load_records(&path, &config.csv_columns).expect("GDSC_CSV readable"), format!("GDSC file {path}"))
            }
            _ => (generate(&SyntheticConfig::default()), "synthetic screen (GDSC_CSV unset)".to_string()),
        };
        let data = prepare(&records, &PrepareOptions::from_config(&config)).expect("prepare");
        let train = &data.split.train;
        let search = randomized_search(
            &train.x.values,
            &train.y,
            &train.x.feature_names,
            &config.search.space,
            &config.params,
            SEARCH_ITER,
            SEARCH_FOLDS,
            config.search.seed,
        )
        .expect("search");
        let tuned = search.best_params.clone();
        let (model, comparison) =
            compare_models(&data.split, &tuned, &config.forest, config.ridge_epsilon).expect("compare");
        Study { source, data, search, tuned, model, comparison }
    })
}

// Random structural trees with consistent covers; features may repeat.
fn random_tree(rng: &mut ChaCha8Rng, p: usize, depth: usize) -> RegressionTree {
    fn grow(rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>, cover: f64, depth: usize, p: usize) -> usize {
        let idx = nodes.len();
        nodes.push(Node::Leaf { weight: 0.0, cover });
        if depth == 0 || rng.random_bool(0.25) {
            nodes[idx] = Node::Leaf { weight: rng.random_range(-5.0..5.0), cover };
            return idx;
        }
        let share = rng.random_range(0.01..0.99);
        let left = grow(rng, nodes, cover * share, depth - 1, p);
        let right = grow(rng, nodes, cover * (1.0 - share), depth - 1, p);
        nodes[idx] = Node::Split {
            feature: rng.random_range(0..p),
            threshold: rng.random_range(-1.0..1.0),
            left,
            right,
            cover,
            default_left: rng.random_bool(0.5),
        };
        idx
    }
    let mut nodes = Vec::new();
    let cover = rng.random_range(2.0..500.0);
    grow(rng, &mut nodes, cover, depth, p);
    RegressionTree { nodes }
}

fn random_ensemble(seed: u64) -> (GbdtModel, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(1..=8);
    let trees = (0..rng.random_range(1..=5)).map(|_| {
        let depth = rng.random_range(1..=3);
        random_tree(&mut rng, p, depth)
    })
    .collect();
    let model = GbdtModel {
        params: HyperParams { learning_rate: rng.random_range(0.01..1.0), ..Default::default() },
        feature_names: (0..p).map(|j| format!("x{j}")).collect(),
        base_score: rng.random_range(-2.0..2.0),
        training_rows: 0,
        trees,
    };
    let inputs = (0..5)
        .map(|_| (0..p).map(|_| if rng.random_bool(0.1) { f64::NAN } else { rng.random_range(-1.5..1.5) }).collect())
        .collect();
    (model, inputs)
}

// Ensembles fitted by the booster itself on random data.
fn fitted_ensemble(seed: u64) -> (GbdtModel, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(1..=8);
    let n = 60;
    let data: Vec<f64> = (0..n * p).map(|_| (rng.random_range(0..6) as f64) / 2.0).collect();
    let x = DenseMatrix::new(n, p, data);
    let y: Vec<f64> = (0..n).map(|i| x.row(i).iter().enumerate().map(|(j, v)| v * (j as f64 - 2.0)).sum::<f64>()
        + x.get(i, 0) * x.get(i, p - 1)
        + rng.random_range(-0.5..0.5))
    .collect();
    let params = HyperParams {
        n_estimators: 5,
        max_depth: 3,
        learning_rate: 0.5,
        subsample: 0.8,
        colsample_bytree: 0.8,
        seed,
        ..Default::default()
    };
    let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let model = fit_gbdt(&x, &y, &names, &params).unwrap();
    let inputs = (0..3).map(|i| x.row(i * 7).to_vec()).collect();
    (model, inputs)
}

#[test]
fn c01_shap_matches_brute_force() {
    let mut worst = 0.0f64;
    let mut ensembles = 0;
    for seed in 0..250u64 {
        let (model, inputs) = if seed % 5 == 4 { fitted_ensemble(seed) } else { random_ensemble(seed) };
        assert!(model.trees.len() <= 5 && model.n_features() <= 8);
        for x in &inputs {
            let fast = tree_shap(&model, x).unwrap();
            let slow = brute_force_shap(&model, x).unwrap();
            for (a, b) in fast.contributions.iter().zip(&slow.contributions) {
                worst = worst.max((a - b).abs());
            }
        }
        ensembles += 1;
    }
    let pass = ensembles >= 200 && worst <= 1e-9;
    report(1, "TreeSHAP equals brute-force Shapley values", pass, &format!("{ensembles} ensembles, max |diff| = {worst:.3e} (limit 1e-9)"));
    assert!(pass);
}

#[test]
fn c02_shap_additivity_on_test_split() {
    let s = study();
    let explanations = explain_rows(&s.model, &s.data.split.test.x).unwrap();
    let worst = explanations.iter().map(|e| e.additivity_error()).fold(0.0f64, f64::max);
    let preds = s.model.predict_rows(&s.data.split.test.x.values);
    let aligned = explanations.iter().zip(&preds).all(|(e, p)| e.prediction == *p);
    let pass = !explanations.is_empty() && worst <= 1e-6 && aligned;
    report(
        2,
        "SHAP additivity on the test split",
        pass,
        &format!("{} rows, max |base + sum phi - prediction| = {worst:.3e} (limit 1e-6); {}", explanations.len(), s.source),
    );
    assert!(pass);
}

#[test]
fn c03_metrics_self_consistency() {
    let (rmse, mse) = (0.1578f64, 0.0249f64);
    let pair_ok = (rmse * rmse - mse).abs() <= 1e-4;
    // Errors 1, 0, 0, 2 around mean 4: MAE 3/4, MSE 5/4, SS_tot 20, R2 = 1 - 5/20.
    let m = regression_metrics(&[1.0, 3.0, 5.0, 7.0], &[2.0, 3.0, 5.0, 5.0]).unwrap();
    let fixture_ok = m.mae == 0.75 && m.mse == 1.25 && m.rmse == 1.25f64.sqrt() && m.r2 == 0.75;
    let perfect = regression_metrics(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
    let perfect_ok = perfect.mae == 0.0 && perfect.mse == 0.0 && perfect.r2 == 1.0;
    let mean = regression_metrics(&[1.0, 2.0, 6.0], &[3.0, 3.0, 3.0]).unwrap();
    let mean_ok = mean.r2 == 0.0 && mean.mse == 14.0 / 3.0;
    let pass = pair_ok && fixture_ok && perfect_ok && mean_ok;
    report(
        3,
        "metric self-consistency",
        pass,
        &format!("0.1578^2 - 0.0249 = {:.2e} (limit 1e-4); hand fixtures exact: {}", rmse * rmse - mse, fixture_ok && perfect_ok && mean_ok),
    );
    assert!(pass);
}

#[test]
fn c04_tuned_gbdt_beats_baselines() {
    let s = study();
    let g = s.comparison.get("gbdt").unwrap();
    let l = s.comparison.get("linear").unwrap();
    let f = s.comparison.get("random_forest").unwrap();
    let pass = g.r2 > l.r2 && g.r2 > f.r2 && g.mae < l.mae && g.mae < f.mae && g.r2 >= 0.95;
    report(
        4,
        "tuned GBDT beats linear and forest baselines",
        pass,
        &format!(
            "test R2 gbdt {:.4} / linear {:.4} / forest {:.4}, MAE {:.4} / {:.4} / {:.4} (need gbdt best and R2 >= 0.95; \
             {SEARCH_ITER} trials x {SEARCH_FOLDS} folds, best n_estimators {} lr {:.4} depth {}); {}",
            g.r2, l.r2, f.r2, g.mae, l.mae, f.mae, s.tuned.n_estimators, s.tuned.learning_rate, s.tuned.max_depth, s.source
        ),
    );
    assert!(s.search.trials.len() == SEARCH_ITER);
    assert!(pass);
}

#[test]
fn c05_boosting_curve_trend() {
    // Same protocol as the `curve` command: the configured training
    // parameters with the curve's learning rate, not the tuned model.
    let s = study();
    let config = AppConfig::default();
    let mut base = config.params.clone();
    if let Some(lr) = config.curve.learning_rate {
        base.learning_rate = lr;
    }
    let (train, test) = (&s.data.split.train, &s.data.split.test);
    let curve =
        boosting_curve(&train.x.values, &train.y, &test.x.values, &test.y, &train.x.feature_names, &config.curve.counts, &base)
            .unwrap();
    let r2: Vec<f64> = curve.iter().map(|p| p.metrics.r2).collect();
    let mae: Vec<f64> = curve.iter().map(|p| p.metrics.mae).collect();
    let monotone = r2.windows(2).all(|w| w[1] >= w[0]) && mae.windows(2).all(|w| w[1] <= w[0]);
    let (r2_first, r2_last, mae_first, mae_last) = (r2[0], *r2.last().unwrap(), mae[0], *mae.last().unwrap());
    // Covering the reference movement: start no better than the reference
    // start plus tolerance, end no worse than the reference end minus it.
    let spans = r2_first <= 0.77 + 0.10 && r2_last >= 0.95 - 0.10 && mae_first >= 1.15 - 0.10 && mae_last <= 0.51 + 0.10;
    let near = |v: f64, t: f64| (v - t).abs() <= 0.10;
    let two_sided = near(r2_first, 0.77) && near(r2_last, 0.95) && near(mae_first, 1.15) && near(mae_last, 0.51);
    let pass = monotone && spans;
    report(
        5,
        "boosting-rounds curve trend",
        pass,
        &format!(
            "counts {:?}, lr {}: R2 {:?}, MAE {:?}; monotone {monotone}, spans reference movement {spans}, \
             every endpoint within 0.10 of reference {two_sided}; {}",
            config.curve.counts,
            base.learning_rate,
            r2.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            mae.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            s.source
        ),
    );
    assert!(pass);
}

#[test]
fn c06_cross_validation_stability() {
    let s = study();
    let config = AppConfig::default();
    let f = &s.data.features;
    let cv = k_fold_cv(&f.values, &s.data.target, config.cv.k, |x, y| fit_gbdt(x, y, &f.feature_names, &s.tuned), config.cv.seed)
        .unwrap();
    let mean = cv.mean_metrics.r2;
    let spread = cv.fold_metrics.iter().map(|m| (m.r2 - mean).abs()).fold(0.0f64, f64::max);
    let pass = cv.k == 5 && cv.r2_std <= 0.01 && spread <= 0.02;
    report(
        6,
        "5-fold cross-validation stability",
        pass,
        &format!(
            "fold R2 {:?}, mean {mean:.4}, std {:.4} (limit 0.01), max |fold - mean| {spread:.4} (limit 0.02); {}",
            cv.fold_metrics.iter().map(|m| (m.r2 * 1e4).round() / 1e4).collect::<Vec<_>>(),
            cv.r2_std,
            s.source
        ),
    );
    assert!(pass);
}

#[test]
fn c07_training_loss_is_monotone() {
    let mut violations = 0usize;
    let mut rounds = 0usize;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(30..150);
        let p = rng.random_range(1..6);
        let x = DenseMatrix::new(n, p, (0..n * p).map(|_| rng.random_range(-2.0..2.0)).collect());
        let y: Vec<f64> = (0..n).map(|i| x.row(i).iter().map(|v| v.sin()).sum::<f64>() + rng.random_range(-1.0..1.0)).collect();
        let params = HyperParams {
            n_estimators: 40,
            learning_rate: rng.random_range(0.05..1.0),
            max_depth: rng.random_range(1..6),
            reg_lambda: rng.random_range(0.0..3.0),
            gamma: if rng.random_bool(0.3) { rng.random_range(0.0..1.0) } else { 0.0 },
            ..Default::default()
        };
        let base = y.iter().sum::<f64>() / n as f64;
        let mut losses = vec![y.iter().map(|v| (v - base).powi(2)).sum::<f64>() / n as f64];
        let mut record = |_: usize, pred: &[f64]| {
            losses.push(pred.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64);
        };
        let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
        fit_gbdt_observed(&x, &y, &names, &params, Some(RoundObserver { on_round: &mut record })).unwrap();
        rounds += losses.len() - 1;
        violations += losses.windows(2).filter(|w| w[1] > w[0] + 1e-12 * w[0].max(1.0)).count();
    }
    let pass = violations == 0 && rounds == 20 * 40;
    report(7, "training MSE non-increasing", pass, &format!("20 datasets, {rounds} rounds, {violations} increases"));
    assert!(pass);
}

#[test]
fn c08_determinism() {
    let records = generate(&SyntheticConfig::mini(5));
    let run = || {
        let data = prepare(&records, &PrepareOptions::default()).unwrap();
        let t = &data.split.train;
        let params = HyperParams { n_estimators: 30, subsample: 0.7, colsample_bytree: 0.6, seed: 3, ..Default::default() };
        let model = fit_gbdt(&t.x.values, &t.y, &t.x.feature_names, &params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, "cfg", &path).unwrap();
        let model_bytes = std::fs::read(&path).unwrap();
        let search =
            randomized_search(&t.x.values, &t.y, &t.x.feature_names, &Default::default(), &HyperParams::default(), 3, 3, 9)
                .unwrap();
        let mut table = Vec::new();
        search.write_csv(&mut table).unwrap();
        let folds = fold_assignments(data.target.len(), 5, 11).unwrap();
        (model_bytes, table, folds)
    };
    let (a, b) = (run(), run());
    let pass = a == b && !a.0.is_empty() && !a.1.is_empty();
    report(
        8,
        "seeded runs are byte-identical",
        pass,
        &format!(
            "model file {} bytes equal {}, trial table equal {}, fold assignments equal {}",
            a.0.len(),
            a.0 == b.0,
            a.1 == b.1,
            a.2 == b.2
        ),
    );
    assert!(pass);
}

#[test]
fn c09_response_classification() {
    let t = DEFAULT_RESISTANCE_THRESHOLD;
    let cases = [(4.1, ResponseLabel::Resistant), (4.0, ResponseLabel::Sensitive), (-1.0, ResponseLabel::Sensitive)];
    let got: Vec<ResponseLabel> = cases.iter().map(|(v, _)| classify_response(*v, t).unwrap().label).collect();
    let pass = t == 4.0 && cases.iter().zip(&got).all(|((_, want), g)| want == g) && classify_response(f64::NAN, t).is_err();
    report(9, "response classification", pass, &format!("4.1 -> {}, 4.0 -> {}, -1.0 -> {}", got[0], got[1], got[2]));
    assert!(pass);
}

#[test]
fn c10_llm_client_contract() {
    const SECRET: &str = "sk-acceptance-31d9e0";
    capture_logs();
    let dir = tempfile::tempdir().unwrap();
    let audit_path = dir.path().join("audit.jsonl");
    let audit = Arc::new(JsonlAuditSink::open(&audit_path).unwrap());
    let client = |url: &str, max_retries: u32| {
        let config = LlmClientConfig {
            endpoint: url.into(),
            timeout_secs: 0.4,
            max_retries,
            backoff_base_secs: 0.01,
            ..Default::default()
        };
        LlmClient::new(config, ApiKey::new(SECRET), audit.clone()).unwrap()
    };

    let mock = MockServer::start(vec![Reply::Status(429, "{}".into()), Reply::ok("summary")]);
    let ok = client(&mock.url, 3).summarize("prompt");
    let retry_ok = matches!(&ok, Ok(r) if r.text == "summary" && r.attempts.len() == 2) && mock.join().len() == 2;

    let mock = MockServer::start(vec![Reply::Status(401, "{}".into()), Reply::ok("unused")]);
    let auth = client(&mock.url, 3).summarize("prompt");
    let auth_ok = matches!(auth, Err(LlmError::Auth { status: 401 })) && mock.requests().len() == 1;

    let slow = Reply::Delay(Duration::from_millis(1200), common::completion_body("late"));
    let mock = MockServer::start(vec![slow; 3]);
    let timeout = client(&mock.url, 2).summarize("prompt");
    let timeout_ok = matches!(timeout, Err(LlmError::Timeout { attempts: 3 })) && mock.join().len() == 3;

    let artifacts = std::fs::read_to_string(&audit_path).unwrap();
    let logs = captured_logs();
    let no_secret = !artifacts.contains(SECRET)
        && artifacts.lines().count() == 3
        && logs.iter().all(|l| !l.contains(SECRET))
        && !format!("{:?}", client("http://127.0.0.1:9", 0)).contains(SECRET);
    let pass = retry_ok && auth_ok && timeout_ok && no_secret;
    report(
        10,
        "chat-completion client contract",
        pass,
        &format!(
            "429 then 200 with one retry {retry_ok}, 401 without retry {auth_ok}, timeout after max_retries {timeout_ok}, \
             secret absent from {} log lines and audit file {no_secret}",
            logs.len()
        ),
    );
    assert!(pass);
}

#[test]
fn c11_serialization_round_trip() {
    let s = study();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let written = save_model(&s.model, &AppConfig::default().hash(), &path).unwrap();
    let loaded = load_model(&path).unwrap();
    let x = &s.data.split.test.x.values;
    let (before, after) = (s.model.predict_rows(x), loaded.model.predict_rows(x));
    let worst = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    let pass = worst <= 1e-12 && loaded.file_sha256 == written && loaded.model == s.model;
    report(
        11,
        "model save/load round trip",
        pass,
        &format!("{} test rows, max |delta prediction| = {worst:.3e} (limit 1e-12); {}", before.len(), s.source),
    );
    assert!(pass);
}
