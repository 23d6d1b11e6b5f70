//! Tree-ensemble regressors and k-fold cross-validation.
//!
//! Feature matrices are row-major slices with `n_features` columns.

mod tree;

use std::time::Instant;

use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tree::{Tree, LEAF};
use tree::{stable_mean, TreeParams};

use crate::error::{Error, Result};
use crate::evaluation::mse;
use crate::windowing::Window;

/// Tag written into every serialized model.
pub const MODEL_FORMAT: &str = "reuse-model/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    /// Bootstrap-aggregated regression trees (random-forest style).
    BaggedTrees,
    /// Gradient-boosted regression trees on squared loss.
    BoostedTrees,
}

impl LearnerKind {
    pub fn label(self) -> &'static str {
        match self {
            LearnerKind::BaggedTrees => "bagged",
            LearnerKind::BoostedTrees => "boosted",
        }
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bagged" | "bagged_trees" | "rf" => Ok(LearnerKind::BaggedTrees),
            "boosted" | "boosted_trees" | "xgb" => Ok(LearnerKind::BoostedTrees),
            other => Err(Error::InvalidConfig(format!("unknown learner `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub n_estimators: usize,
    pub max_depth: usize,
    /// Shrinkage; only used by boosting.
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn bagged() -> Self {
        Self {
            kind: LearnerKind::BaggedTrees,
            n_estimators: 100,
            max_depth: 12,
            learning_rate: 1.0,
            min_samples_leaf: 1,
            seed: 0,
        }
    }

    pub fn boosted() -> Self {
        Self {
            kind: LearnerKind::BoostedTrees,
            n_estimators: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 1,
            seed: 0,
        }
    }

    pub fn of_kind(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::BaggedTrees => Self::bagged(),
            LearnerKind::BoostedTrees => Self::boosted(),
        }
    }

    pub fn with_estimators(mut self, n: usize) -> Self {
        self.n_estimators = n;
        self
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_min_samples_leaf(mut self, n: usize) -> Self {
        self.min_samples_leaf = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::InvalidConfig("n_estimators must be at least 1".into()));
        }
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig("max_depth and min_samples_leaf must be positive".into()));
        }
        if self.kind == LearnerKind::BoostedTrees && !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

/// Derives an independent RNG seed for sub-stream `stream` of `seed`
/// (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub spec: LearnerSpec,
    pub n_features: usize,
    /// Boosting's initial prediction; 0 for bagging.
    pub base: f64,
    pub trees: Vec<Tree>,
    pub trained_on_window: usize,
    /// Timestamp of the last training row.
    pub trained_at: NaiveDateTime,
    pub train_time_seconds: f64,
}

fn check_matrix(x: &[f64], n_features: usize, rows: usize) -> Result<()> {
    if n_features == 0 || x.len() != rows * n_features {
        return Err(Error::ArityMismatch {
            expected: rows * n_features,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    Ok(())
}

/// Fits `spec` to `(x, y)`.
pub fn fit(spec: &LearnerSpec, x: &[f64], n_features: usize, y: &[f64]) -> Result<TrainedModel> {
    spec.validate()?;
    if y.len() < 2 {
        return Err(Error::DegenerateInput(y.len()));
    }
    check_matrix(x, n_features, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    let started = Instant::now();
    let params = spec.tree_params();
    let n = y.len();
    let (base, trees) = match spec.kind {
        LearnerKind::BaggedTrees => {
            let trees = (0..spec.n_estimators)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, i as u64));
                    let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                    Tree::fit(x, y, n_features, &mut rows, params)
                })
                .collect();
            (0.0, trees)
        }
        LearnerKind::BoostedTrees => {
            let base = stable_mean(y.iter().copied());
            let mut pred = vec![base; n];
            let mut residual: Vec<f64> = y.iter().map(|v| v - base).collect();
            let mut loss: f64 = residual.iter().map(|r| r * r).sum();
            let mut trees = Vec::with_capacity(spec.n_estimators);
            for _ in 0..spec.n_estimators {
                let mut rows: Vec<usize> = (0..n).collect();
                let tree = Tree::fit(x, &residual, n_features, &mut rows, params);
                for i in 0..n {
                    pred[i] += spec.learning_rate * tree.predict_row(&x[i * n_features..(i + 1) * n_features]);
                    residual[i] = y[i] - pred[i];
                }
                let next: f64 = residual.iter().map(|r| r * r).sum();
                assert!(
                    next <= loss * (1.0 + 1e-9) + 1e-12,
                    "boosting loss increased from {loss} to {next}"
                );
                loss = next;
                trees.push(tree);
            }
            (base, trees)
        }
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.to_string(),
        spec: *spec,
        n_features,
        base,
        trees,
        trained_on_window: 0,
        trained_at: NaiveDateTime::default(),
        train_time_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Fits on one window, seeding from the window index so that every strategy
/// produces the same model for the same window.
pub fn fit_window(spec: &LearnerSpec, window: &Window<'_>) -> Result<TrainedModel> {
    let seeded = spec.with_seed(derive_seed(spec.seed, window.index as u64));
    let mut model = fit(&seeded, window.features(), window.n_features(), window.target())?;
    model.spec = *spec;
    model.trained_on_window = window.index;
    model.trained_at = window.last_timestamp();
    Ok(model)
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64], n_features: usize) -> Result<Vec<f64>> {
        if n_features != self.n_features {
            return Err(Error::ArityMismatch {
                expected: self.n_features,
                got: n_features,
            });
        }
        if !x.len().is_multiple_of(n_features) {
            return Err(Error::ArityMismatch {
                expected: n_features,
                got: x.len() % n_features,
            });
        }
        Ok(x.chunks_exact(n_features).map(|row| self.predict_row(row)).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.spec.kind {
            LearnerKind::BaggedTrees => stable_mean(self.trees.iter().map(|t| t.predict_row(row))),
            LearnerKind::BoostedTrees => {
                let mut acc = self.base;
                for t in &self.trees {
                    acc += self.spec.learning_rate * t.predict_row(row);
                }
                acc
            }
        }
    }

    pub fn predict_window(&self, window: &Window<'_>) -> Result<Vec<f64>> {
        self.predict(window.features(), window.n_features())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(model.format));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldMode {
    /// Rows shuffled with the spec's seed before splitting.
    #[default]
    Shuffled,
    /// Contiguous folds in time order.
    Temporal,
}

/// Mean of the per-fold test MSEs of `k`-fold cross-validation.
pub fn cross_validate(
    spec: &LearnerSpec,
    x: &[f64],
    n_features: usize,
    y: &[f64],
    k: usize,
    mode: FoldMode,
) -> Result<f64> {
    let n = y.len();
    if k < 2 || n < k {
        return Err(Error::TooFewRows { rows: n, folds: k });
    }
    check_matrix(x, n_features, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    if mode == FoldMode::Shuffled {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    }
    let gather = |rows: &[usize]| {
        let mut xs = Vec::with_capacity(rows.len() * n_features);
        let mut ys = Vec::with_capacity(rows.len());
        for &r in rows {
            xs.extend_from_slice(&x[r * n_features..(r + 1) * n_features]);
            ys.push(y[r]);
        }
        (xs, ys)
    };
    let mut start = 0;
    let mut scores = Vec::with_capacity(k);
    for fold in 0..k {
        let size = n / k + usize::from(fold < n % k);
        let test = &order[start..start + size];
        let train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        start += size;
        let (xt, yt) = gather(&train);
        let (xv, yv) = gather(test);
        let model = fit(spec, &xt, n_features, &yt)?;
        scores.push(mse(&yv, &model.predict(&xv, n_features)?)?);
    }
    Ok(scores.iter().sum::<f64>() / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_data(n: usize) -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let y = x.iter().map(|&v| if v < 0.5 { 1.0 } else { 3.0 } + v).collect();
        (x, y)
    }

    #[test]
    fn constant_target_is_learned_exactly() {
        let x: Vec<f64> = (0..40).map(|i| (i * 7 % 13) as f64).collect();
        let y = vec![0.37; 20];
        for spec in [LearnerSpec::bagged().with_estimators(10), LearnerSpec::boosted()] {
            let m = fit(&spec, &x, 2, &y).unwrap();
            let p = m.predict(&[100.0, -3.0, 0.5, 0.5], 2).unwrap();
            assert_eq!(p, vec![0.37, 0.37]);
        }
    }

    #[test]
    fn beats_the_mean_predictor() {
        let (x, y) = step_data(200);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let baseline = mse(&y, &vec![mean; y.len()]).unwrap();
        for spec in [LearnerSpec::bagged().with_estimators(20), LearnerSpec::boosted()] {
            let m = fit(&spec, &x, 1, &y).unwrap();
            let err = mse(&y, &m.predict(&x, 1).unwrap()).unwrap();
            assert!(err < baseline / 10.0, "{spec:?}: {err} vs {baseline}");
        }
    }

    #[test]
    fn input_checks() {
        let spec = LearnerSpec::boosted();
        assert!(matches!(fit(&spec, &[1.0], 1, &[1.0]), Err(Error::DegenerateInput(1))));
        let m = fit(&spec, &[1.0, 2.0, 3.0, 4.0], 2, &[1.0, 2.0]).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0, 3.0], 3), Err(Error::ArityMismatch { .. })));
        assert!(spec.with_estimators(0).validate().is_err());
        let mut bad = LearnerSpec::boosted();
        bad.learning_rate = 1.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn deterministic_and_round_trips() {
        let (x, y) = step_data(120);
        let spec = LearnerSpec::bagged().with_estimators(8).with_seed(3);
        let a = fit(&spec, &x, 1, &y).unwrap();
        let b = fit(&spec, &x, 1, &y).unwrap();
        assert_eq!(a.trees, b.trees);
        let back = TrainedModel::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        let mut other = a.clone();
        other.format = "something-else".into();
        assert!(matches!(
            TrainedModel::from_json(&other.to_json().unwrap()),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn leave_one_out_mean_predictor() {
        // each held-out y_i is predicted by the mean of the other four
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let oracle: f64 = (0..5)
            .map(|i| {
                let rest: f64 = y.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).sum();
                let e = y[i] - rest / 4.0;
                e * e
            })
            .sum::<f64>()
            / 5.0;
        let stump = LearnerSpec::boosted().with_estimators(1).with_min_samples_leaf(3);
        for mode in [FoldMode::Shuffled, FoldMode::Temporal] {
            let got = cross_validate(&stump, &x, 1, &y, 5, mode).unwrap();
            assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
        }
        assert_eq!(oracle, 3.125);
    }

    #[test]
    fn cross_validation_edges() {
        let spec = LearnerSpec::boosted().with_estimators(5);
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        assert_eq!(cross_validate(&spec, &x, 1, &[2.5; 30], 5, FoldMode::Shuffled).unwrap(), 0.0);
        assert!(matches!(
            cross_validate(&spec, &[1.0, 2.0, 3.0], 1, &[1.0, 2.0, 3.0], 5, FoldMode::Shuffled),
            Err(Error::TooFewRows { rows: 3, folds: 5 })
        ));
    }
}
