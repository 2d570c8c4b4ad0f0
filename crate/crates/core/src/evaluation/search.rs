use super::cv::{k_fold_cv, sample_std};
use super::EvalError;
use crate::gbdt::{fit_gbdt, HyperParams};
use crate::matrix::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Tunable booster hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    NEstimators,
    LearningRate,
    MaxDepth,
    Subsample,
    ColsampleBytree,
    RegLambda,
    Gamma,
    MinChildWeight,
}

impl ParamName {
    pub const ALL: [ParamName; 8] = [
        ParamName::NEstimators,
        ParamName::LearningRate,
        ParamName::MaxDepth,
        ParamName::Subsample,
        ParamName::ColsampleBytree,
        ParamName::RegLambda,
        ParamName::Gamma,
        ParamName::MinChildWeight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::NEstimators => "n_estimators",
            ParamName::LearningRate => "learning_rate",
            ParamName::MaxDepth => "max_depth",
            ParamName::Subsample => "subsample",
            ParamName::ColsampleBytree => "colsample_bytree",
            ParamName::RegLambda => "reg_lambda",
            ParamName::Gamma => "gamma",
            ParamName::MinChildWeight => "min_child_weight",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, ParamName::NEstimators | ParamName::MaxDepth)
    }

    pub fn get(self, p: &HyperParams) -> f64 {
        match self {
            ParamName::NEstimators => p.n_estimators as f64,
            ParamName::LearningRate => p.learning_rate,
            ParamName::MaxDepth => p.max_depth as f64,
            ParamName::Subsample => p.subsample,
            ParamName::ColsampleBytree => p.colsample_bytree,
            ParamName::RegLambda => p.reg_lambda,
            ParamName::Gamma => p.gamma,
            ParamName::MinChildWeight => p.min_child_weight,
        }
    }

    fn set(self, p: &mut HyperParams, v: f64) {
        match self {
            ParamName::NEstimators => p.n_estimators = v.round() as usize,
            ParamName::LearningRate => p.learning_rate = v,
            ParamName::MaxDepth => p.max_depth = v.round() as usize,
            ParamName::Subsample => p.subsample = v,
            ParamName::ColsampleBytree => p.colsample_bytree = v,
            ParamName::RegLambda => p.reg_lambda = v,
            ParamName::Gamma => p.gamma = v,
            ParamName::MinChildWeight => p.min_child_weight = v,
        }
    }
}

/// Sampling distribution of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSpec {
    Choice { values: Vec<f64> },
    /// Inclusive grid `low, low + step, …, ≤ high`.
    IntRange { low: i64, high: i64, step: i64 },
    Uniform { low: f64, high: f64, #[serde(default)] log: bool },
}

impl ParamSpec {
    fn validate(&self, name: ParamName) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::InvalidSpace(format!("{}: {m}", name.as_str())));
        match self {
            ParamSpec::Choice { values } if values.is_empty() => bad("empty choice list".into()),
            ParamSpec::Choice { values } if values.iter().any(|v| !v.is_finite()) => bad("non-finite choice".into()),
            ParamSpec::IntRange { low, high, step } if low >= high || *step <= 0 => {
                bad(format!("need low < high and step > 0, got {low}..{high} step {step}"))
            }
            ParamSpec::Uniform { low, high, .. } if !(low < high) || !low.is_finite() || !high.is_finite() => {
                bad(format!("need finite low < high, got {low}..{high}"))
            }
            ParamSpec::Uniform { low, log: true, .. } if *low <= 0.0 => bad("log scale needs low > 0".into()),
            ParamSpec::Uniform { .. } if name.is_integer() => bad("integer parameter needs a choice or int_range".into()),
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ParamSpec::Choice { values } => values[rng.random_range(0..values.len())],
            ParamSpec::IntRange { low, high, step } => {
                let count = (high - low) / step + 1;
                (low + step * rng.random_range(0..count)) as f64
            }
            ParamSpec::Uniform { low, high, log } => {
                let u: f64 = rng.random();
                if *log {
                    (low.ln() + u * (high.ln() - low.ln())).exp()
                } else {
                    low + u * (high - low)
                }
            }
        }
    }
}

/// Search space; parameters are drawn in `ParamName` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamSpace(pub BTreeMap<ParamName, ParamSpec>);

impl Default for ParamSpace {
    /// n_estimators 50..=500 by 50, learning rate log-uniform on [0.01, 0.3],
    /// depth 3..=10, row and column fractions uniform on [0.6, 1].
    fn default() -> Self {
        let mut m = BTreeMap::new();
        m.insert(ParamName::NEstimators, ParamSpec::IntRange { low: 50, high: 500, step: 50 });
        m.insert(ParamName::LearningRate, ParamSpec::Uniform { low: 0.01, high: 0.3, log: true });
        m.insert(ParamName::MaxDepth, ParamSpec::IntRange { low: 3, high: 10, step: 1 });
        m.insert(ParamName::Subsample, ParamSpec::Uniform { low: 0.6, high: 1.0, log: false });
        m.insert(ParamName::ColsampleBytree, ParamSpec::Uniform { low: 0.6, high: 1.0, log: false });
        ParamSpace(m)
    }
}

impl ParamSpace {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.0.is_empty() {
            return Err(EvalError::EmptySpace);
        }
        self.0.iter().try_for_each(|(name, spec)| spec.validate(*name))
    }

    /// Draw `n` configurations on top of `base`.
    pub fn sample(&self, base: &HyperParams, n: usize, seed: u64) -> Result<Vec<HyperParams>, EvalError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| {
                let mut p = base.clone();
                for (name, spec) in &self.0 {
                    name.set(&mut p, spec.draw(&mut rng));
                }
                p
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub params: HyperParams,
    pub fold_r2: Vec<f64>,
    pub mean_r2: f64,
    pub std_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_index: usize,
    pub best_params: HyperParams,
    pub best_score: f64,
    pub k: usize,
    pub seed: u64,
    pub trials: Vec<Trial>,
}

impl SearchResult {
    /// Trial table: one row per trial with every tunable parameter.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["trial".to_string()];
        header.extend(ParamName::ALL.iter().map(|p| p.as_str().to_string()));
        header.extend(["seed", "mean_r2", "std_r2"].map(String::from));
        w.write_record(&header)?;
        for t in &self.trials {
            let mut row = vec![t.index.to_string()];
            row.extend(ParamName::ALL.iter().map(|p| p.get(&t.params).to_string()));
            row.extend([t.params.seed.to_string(), t.mean_r2.to_string(), t.std_r2.to_string()]);
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Score `n_iter` sampled configurations by k-fold mean R² and return the best.
///
/// All samples are drawn before any scoring and every trial uses the same fold
/// assignment. Ties keep the earliest trial.
#[allow(clippy::too_many_arguments)]
pub fn randomized_search(
    x: &DenseMatrix,
    y: &[f64],
    feature_names: &[String],
    space: &ParamSpace,
    base: &HyperParams,
    n_iter: usize,
    k: usize,
    seed: u64,
) -> Result<SearchResult, EvalError> {
    if n_iter == 0 {
        return Err(EvalError::InvalidSpace("n_iter must be >= 1".into()));
    }
    let candidates = space.sample(base, n_iter, seed)?;
    let mut trials = Vec::with_capacity(n_iter);
    for (index, params) in candidates.into_iter().enumerate() {
        params.validate()?;
        let report = k_fold_cv(x, y, k, |xt, yt| fit_gbdt(xt, yt, feature_names, &params), seed)?;
        let fold_r2: Vec<f64> = report.fold_metrics.iter().map(|m| m.r2).collect();
        log::info!("trial {index}: mean R2 {:.6}", report.mean_metrics.r2);
        trials.push(Trial { index, std_r2: sample_std(&fold_r2), mean_r2: report.mean_metrics.r2, fold_r2, params });
    }
    let best = trials
        .iter()
        .fold(None::<&Trial>, |best, t| match best {
            Some(b) if b.mean_r2 >= t.mean_r2 => Some(b),
            _ => Some(t),
        })
        .expect("n_iter >= 1");
    Ok(SearchResult {
        best_index: best.index,
        best_params: best.params.clone(),
        best_score: best.mean_r2,
        k,
        seed,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("f{i}")).collect()
    }

    fn and_fixture() -> (DenseMatrix, Vec<f64>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for rep in 0..10 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                rows.push(vec![a, b]);
                y.push(a * b + 0.001 * rep as f64);
            }
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn default_space_draws_within_ranges() {
        let s = ParamSpace::default().sample(&HyperParams::default(), 200, 4).unwrap();
        for p in &s {
            assert!(p.n_estimators % 50 == 0 && (50..=500).contains(&p.n_estimators));
            assert!((0.01..=0.3).contains(&p.learning_rate));
            assert!((3..=10).contains(&p.max_depth));
            assert!((0.6..=1.0).contains(&p.subsample) && (0.6..=1.0).contains(&p.colsample_bytree));
            assert!(p.validate().is_ok());
        }
        assert!(s.iter().any(|p| p.n_estimators == 500) && s.iter().any(|p| p.max_depth == 10));
    }

    #[test]
    fn invalid_spaces() {
        assert!(matches!(ParamSpace(BTreeMap::new()).validate(), Err(EvalError::EmptySpace)));
        let mut m = BTreeMap::new();
        m.insert(ParamName::Gamma, ParamSpec::Uniform { low: 1.0, high: 1.0, log: false });
        assert!(matches!(ParamSpace(m).validate(), Err(EvalError::InvalidSpace(_))));
        let mut m = BTreeMap::new();
        m.insert(ParamName::MaxDepth, ParamSpec::Choice { values: vec![] });
        assert!(ParamSpace(m).validate().is_err());
    }

    #[test]
    fn single_point_space() {
        let (x, y) = and_fixture();
        let mut m = BTreeMap::new();
        m.insert(ParamName::MaxDepth, ParamSpec::Choice { values: vec![2.0] });
        let base = HyperParams { n_estimators: 5, ..Default::default() };
        let r = randomized_search(&x, &y, &names(2), &ParamSpace(m), &base, 3, 4, 1).unwrap();
        assert_eq!(r.trials.len(), 3);
        assert!(r.trials.iter().all(|t| t.params == r.trials[0].params && t.mean_r2 == r.trials[0].mean_r2));
        assert_eq!(r.best_index, 0);
        assert_eq!(r.best_params.max_depth, 2);
    }

    #[test]
    fn deeper_trees_win_on_interaction() {
        // y = a·b on the four corners: stumps only build additive models, whose
        // best fit leaves residuals ±0.25 (R² = 1 − 0.0625/0.1875 = 2/3), while a
        // depth-2 tree represents the product exactly.
        let (x, y) = and_fixture();
        let mut m = BTreeMap::new();
        m.insert(ParamName::MaxDepth, ParamSpec::Choice { values: vec![1.0, 2.0] });
        let base = HyperParams { n_estimators: 20, ..Default::default() };
        let r = randomized_search(&x, &y, &names(2), &ParamSpace(m), &base, 8, 4, 2).unwrap();
        assert!(r.trials.iter().any(|t| t.params.max_depth == 1));
        assert_eq!(r.best_params.max_depth, 2);
        assert!(r.best_score > 0.99);
        for t in r.trials.iter().filter(|t| t.params.max_depth == 1) {
            assert!(t.mean_r2 < 0.8);
        }
        let max = r.trials.iter().map(|t| t.mean_r2).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_score, max);
        assert_eq!(r.trials.iter().position(|t| t.mean_r2 == max), Some(r.best_index));
    }

    #[test]
    fn search_is_deterministic() {
        let (x, y) = and_fixture();
        let base = HyperParams { n_estimators: 5, ..Default::default() };
        let mut m = BTreeMap::new();
        m.insert(ParamName::LearningRate, ParamSpec::Uniform { low: 0.05, high: 0.5, log: true });
        m.insert(ParamName::Subsample, ParamSpec::Uniform { low: 0.6, high: 1.0, log: false });
        let space = ParamSpace(m);
        let a = randomized_search(&x, &y, &names(2), &space, &base, 4, 4, 9).unwrap();
        let b = randomized_search(&x, &y, &names(2), &space, &base, 4, 4, 9).unwrap();
        assert_eq!(a, b);
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(String::from_utf8(ca).unwrap().lines().count(), 5);
    }
}
