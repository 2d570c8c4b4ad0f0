use super::GbdtError;
use serde::{Deserialize, Serialize};

/// Booster hyperparameters.
///
/// `reg_lambda`, `gamma` and `min_child_weight` default to 1, 0 and 1.
/// `base_score: None` means "mean of the training targets".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub reg_lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub base_score: Option<f64>,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.3,
            max_depth: 6,
            subsample: 1.0,
            colsample_bytree: 1.0,
            reg_lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            base_score: None,
            seed: 0,
        }
    }
}

impl HyperParams {
    /// Check every range constraint.
    ///
    /// `learning_rate = 0` is accepted: it freezes the ensemble at the base
    /// score, which the rounds curve and linearity checks rely on.
    pub fn validate(&self) -> Result<(), GbdtError> {
        let bad = |m: String| Err(GbdtError::InvalidHyperParams(m));
        if self.n_estimators == 0 {
            return bad("n_estimators must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return bad(format!("learning_rate {} outside [0, 1]", self.learning_rate));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive".into());
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample {} outside (0, 1]", self.subsample));
        }
        if !(self.colsample_bytree > 0.0 && self.colsample_bytree <= 1.0) {
            return bad(format!("colsample_bytree {} outside (0, 1]", self.colsample_bytree));
        }
        if !(self.reg_lambda >= 0.0) || !(self.gamma >= 0.0) || !(self.min_child_weight >= 0.0) {
            return bad("reg_lambda, gamma and min_child_weight must be >= 0".into());
        }
        if self.base_score.is_some_and(|b| !b.is_finite()) {
            return bad("base_score must be finite".into());
        }
        Ok(())
    }

    pub fn growth(&self) -> super::builder::GrowthParams {
        super::builder::GrowthParams {
            max_depth: self.max_depth,
            reg_lambda: self.reg_lambda,
            gamma: self.gamma,
            min_child_weight: self.min_child_weight,
        }
    }
}
