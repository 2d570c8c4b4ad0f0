use super::EvalError;
use serde::{Deserialize, Serialize};

/// Regression error summary of one evaluated split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub r2: f64,
}

impl Metrics {
    /// Arithmetic mean of each field.
    pub fn mean(all: &[Metrics]) -> Option<Metrics> {
        if all.is_empty() {
            return None;
        }
        let n = all.len() as f64;
        let avg = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        Some(Metrics { mae: avg(|m| m.mae), mse: avg(|m| m.mse), rmse: avg(|m| m.rmse), r2: avg(|m| m.r2) })
    }
}

/// MAE, MSE, RMSE and R², with R² measured against the mean of `y_true`.
pub fn regression_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let (mut abs, mut ss_res, mut ss_tot) = (0.0, 0.0, 0.0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = t - p;
        abs += e.abs();
        ss_res += e * e;
        ss_tot += (t - mean) * (t - mean);
    }
    if ss_tot == 0.0 {
        return Err(EvalError::ZeroVarianceTarget);
    }
    let mse = ss_res / n;
    Ok(Metrics { mae: abs / n, mse, rmse: mse.sqrt(), r2: 1.0 - ss_res / ss_tot })
}
