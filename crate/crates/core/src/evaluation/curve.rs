use super::{regression_metrics, EvalError, Metrics};
use crate::gbdt::{fit_gbdt, HyperParams};
use crate::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_estimators: usize,
    pub metrics: Metrics,
}

/// Test metrics after each requested number of boosting rounds.
///
/// Boosting rounds are nested, so one ensemble of `max(counts)` trees is
/// trained and each point evaluates its first `count` trees; this equals
/// training a separate model per count.
pub fn boosting_curve(
    x_train: &DenseMatrix,
    y_train: &[f64],
    x_eval: &DenseMatrix,
    y_eval: &[f64],
    feature_names: &[String],
    counts: &[usize],
    base_params: &HyperParams,
) -> Result<Vec<CurvePoint>, EvalError> {
    if counts.is_empty() || counts[0] == 0 || counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::InvalidCounts(format!("{counts:?} is not a strictly increasing list of positive counts")));
    }
    if x_eval.rows() != y_eval.len() {
        return Err(EvalError::LengthMismatch { left: x_eval.rows(), right: y_eval.len() });
    }
    let params = HyperParams { n_estimators: *counts.last().expect("non-empty"), ..base_params.clone() };
    let model = fit_gbdt(x_train, y_train, feature_names, &params)?;

    // Accumulate tree outputs incrementally instead of re-walking prefixes.
    let mut sums = vec![0.0; y_eval.len()];
    let mut done = 0;
    let mut points = Vec::with_capacity(counts.len());
    for &count in counts {
        for tree in &model.trees[done..count] {
            for (s, row) in sums.iter_mut().zip(x_eval.iter_rows()) {
                *s += tree.predict(row);
            }
        }
        done = count;
        let pred: Vec<f64> = sums.iter().map(|s| model.base_score + model.learning_rate() * s).collect();
        points.push(CurvePoint { n_estimators: count, metrics: regression_metrics(y_eval, &pred)? });
    }
    Ok(points)
}

/// Columns `n_estimators, r2, mae`.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_estimators", "r2", "mae"])?;
    for p in points {
        w.write_record([p.n_estimators.to_string(), p.metrics.r2.to_string(), p.metrics.mae.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn step() -> (DenseMatrix, Vec<f64>, Vec<String>) {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 - 20.0).collect();
        let y = xs.iter().map(|&v| if v < 0.0 { 2.0 } else { 6.0 }).collect();
        (DenseMatrix::new(40, 1, xs), y, vec!["x".into()])
    }

    #[test]
    fn single_point_on_step_data() {
        let (x, y, n) = step();
        // One unit-rate round leaves residuals 2/21 of the ±2 deviation.
        let p = HyperParams { learning_rate: 1.0, ..Default::default() };
        let c = boosting_curve(&x, &y, &x, &y, &n, &[1], &p).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].metrics.r2 - (1.0 - (1.0f64 / 21.0).powi(2))).abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_is_flat() {
        let (x, y, n) = step();
        let p = HyperParams { learning_rate: 0.0, ..Default::default() };
        let c = boosting_curve(&x, &y, &x, &y, &n, &[10, 20], &p).unwrap();
        assert_eq!(c[0].metrics, c[1].metrics);
    }

    #[test]
    fn points_equal_separately_trained_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 3.0 + r[1].abs() + 0.1 * rng.random::<f64>()).collect();
        let x = DenseMatrix::from_rows(&rows);
        let names = vec!["a".into(), "b".into(), "c".into()];
        let base = HyperParams { max_depth: 3, subsample: 0.8, seed: 3, ..Default::default() };
        let c = boosting_curve(&x, &y, &x, &y, &names, &[3, 7], &base).unwrap();
        for p in &c {
            let m = fit_gbdt(&x, &y, &names, &HyperParams { n_estimators: p.n_estimators, ..base.clone() }).unwrap();
            let pred = m.predict_batch(&x).unwrap();
            assert_eq!(regression_metrics(&y, &pred).unwrap(), p.metrics);
        }
        let full = boosting_curve(&x, &y, &x, &y, &names, &(1..=30).collect::<Vec<_>>(), &base).unwrap();
        let no_sampling = HyperParams { subsample: 1.0, ..base };
        let train = boosting_curve(&x, &y, &x, &y, &names, &(1..=30).collect::<Vec<_>>(), &no_sampling).unwrap();
        assert!(train.windows(2).all(|w| w[1].metrics.r2 >= w[0].metrics.r2 - 1e-12));
        assert_eq!(full.len(), 30);
    }

    #[test]
    fn rejects_unordered_counts_and_writes_csv() {
        let (x, y, n) = step();
        for counts in [vec![], vec![0], vec![5, 5], vec![3, 2]] {
            assert!(matches!(
                boosting_curve(&x, &y, &x, &y, &n, &counts, &HyperParams::default()),
                Err(EvalError::InvalidCounts(_))
            ));
        }
        let c = boosting_curve(&x, &y, &x, &y, &n, &[1, 2], &HyperParams::default()).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n_estimators,r2,mae\n1,"));
    }
}
