//! The four maintenance strategies and the model registry they share.
//!
//! Every strategy scores windows `1..n` so their per-window MSE lists line up.

mod registry;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use registry::{prune_registry, ModelId, ModelRegistry, DEFAULT_RETENTION_MONTHS};

use crate::error::{Error, Result};
use crate::evaluation::{mse, CostLedger, Operation};
use crate::forecasting::Forecaster;
use crate::learners::{fit_window, LearnerSpec, TrainedModel};
use crate::similarity::{resolve_root, SimilarityConfig, SimilarityEntry, SimilarityMap, SimilarityTracker};
use crate::windowing::{window_index_for_offset, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Stationary,
    Periodic,
    Random,
    Reuse,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Stationary,
        StrategyKind::Periodic,
        StrategyKind::Random,
        StrategyKind::Reuse,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Stationary => "stationary",
            StrategyKind::Periodic => "periodic",
            StrategyKind::Random => "random",
            StrategyKind::Reuse => "reuse",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.label() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{s}`")))
    }
}

/// Where the predictions for a window came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// A model freshly fit on window `trained_on`.
    New { trained_on: usize },
    /// The stationary model, fit earlier on window `trained_on`.
    Kept { trained_on: usize },
    /// The model registered for window `source`, found through the similarity map.
    ReusedFrom { source: usize },
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub window: usize,
    pub mse: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowTiming {
    pub window: usize,
    pub train_seconds: f64,
    pub predict_seconds: f64,
}

/// Everything wall-clock dependent, kept apart from the deterministic part.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub per_window: Vec<WindowTiming>,
    pub ledger: CostLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityConfig>,
    pub window_days: u32,
    pub records: Vec<WindowRecord>,
    pub aggregate_mse: f64,
    pub fits: usize,
    pub reduced_training_count: usize,
    pub timings: Timings,
}

impl StrategyReport {
    fn new(strategy: StrategyKind, windows: &[Window<'_>], ledger: CostLedger) -> Self {
        Self {
            strategy,
            learner: None,
            similarity: None,
            window_days: windows[0].length_days,
            records: Vec::with_capacity(windows.len() - 1),
            aggregate_mse: 0.0,
            fits: 0,
            reduced_training_count: 0,
            timings: Timings {
                per_window: Vec::with_capacity(windows.len() - 1),
                ledger,
            },
        }
    }

    fn push(&mut self, record: WindowRecord, timing: WindowTiming) {
        match record.provenance {
            Provenance::New { .. } => self.fits += 1,
            Provenance::ReusedFrom { .. } => self.reduced_training_count += 1,
            _ => {}
        }
        self.records.push(record);
        self.timings.per_window.push(timing);
    }

    fn finish(mut self) -> Self {
        let mses = self.window_mses();
        self.aggregate_mse = mses.iter().sum::<f64>() / mses.len() as f64;
        self
    }

    /// E.g. `periodic/bagged` or `reuse/boosted/es/wd`.
    pub fn label(&self) -> String {
        let mut parts = vec![self.strategy.label().to_string()];
        if let Some(l) = &self.learner {
            parts.push(l.kind.label().to_string());
        }
        if let Some(s) = &self.similarity {
            parts.push(s.forecaster.label().to_ascii_lowercase());
            parts.push(s.metric.label().to_ascii_lowercase());
        }
        parts.join("/")
    }

    pub fn window_indices(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.window).collect()
    }

    pub fn window_mses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mse).collect()
    }

    pub fn train_seconds(&self) -> f64 {
        self.timings.ledger.seconds(Operation::Training)
    }
}

fn require_windows(windows: &[Window<'_>]) -> Result<()> {
    if windows.len() < 2 {
        return Err(Error::TooFewWindows {
            needed: 2,
            got: windows.len(),
        });
    }
    Ok(())
}

fn train(spec: &LearnerSpec, window: &Window<'_>, ledger: &mut CostLedger) -> Result<TrainedModel> {
    let model = fit_window(spec, window)?;
    ledger.record(Operation::Training, model.train_time_seconds);
    Ok(model)
}

/// Returns `(mse, predict seconds)`.
fn score(model: &TrainedModel, window: &Window<'_>, ledger: &mut CostLedger) -> Result<(f64, f64)> {
    let started = Instant::now();
    let predicted = model.predict_window(window)?;
    let seconds = started.elapsed().as_secs_f64();
    ledger.record(Operation::Prediction, seconds);
    Ok((mse(window.target(), &predicted)?, seconds))
}

/// Fits once on window 0 and predicts every later window with that model.
pub fn run_stationary(windows: &[Window<'_>], spec: &LearnerSpec) -> Result<StrategyReport> {
    require_windows(windows)?;
    let mut ledger = CostLedger::default();
    let model = train(spec, &windows[0], &mut ledger)?;
    let mut report = StrategyReport::new(StrategyKind::Stationary, windows, CostLedger::default());
    report.learner = Some(*spec);
    for (t, w) in windows.iter().enumerate().skip(1) {
        let (err, predict_seconds) = score(&model, w, &mut ledger)?;
        let provenance = if t == 1 {
            Provenance::New { trained_on: 0 }
        } else {
            Provenance::Kept { trained_on: 0 }
        };
        let train_seconds = if t == 1 { model.train_time_seconds } else { 0.0 };
        report.push(
            WindowRecord { window: t, mse: err, provenance, similarity: None },
            WindowTiming { window: t, train_seconds, predict_seconds },
        );
    }
    report.timings.ledger = ledger;
    Ok(report.finish())
}

/// Fits on window `t - 1` and predicts window `t`, for every `t >= 1`.
pub fn run_periodic(windows: &[Window<'_>], spec: &LearnerSpec) -> Result<StrategyReport> {
    require_windows(windows)?;
    let mut ledger = CostLedger::default();
    let mut report = StrategyReport::new(StrategyKind::Periodic, windows, CostLedger::default());
    report.learner = Some(*spec);
    for t in 1..windows.len() {
        let model = train(spec, &windows[t - 1], &mut ledger)?;
        let (err, predict_seconds) = score(&model, &windows[t], &mut ledger)?;
        report.push(
            WindowRecord {
                window: t,
                mse: err,
                provenance: Provenance::New { trained_on: t - 1 },
                similarity: None,
            },
            WindowTiming {
                window: t,
                train_seconds: model.train_time_seconds,
                predict_seconds,
            },
        );
    }
    report.timings.ledger = ledger;
    Ok(report.finish())
}

/// Predicts each window with values drawn uniformly between the minimum and
/// maximum of its own targets.
pub fn run_random(windows: &[Window<'_>], seed: u64) -> Result<StrategyReport> {
    require_windows(windows)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ledger = CostLedger::default();
    let mut report = StrategyReport::new(StrategyKind::Random, windows, CostLedger::default());
    for (t, w) in windows.iter().enumerate().skip(1) {
        let started = Instant::now();
        let y = w.target();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let predicted: Vec<f64> = (0..y.len())
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        let predict_seconds = started.elapsed().as_secs_f64();
        ledger.record(Operation::Prediction, predict_seconds);
        report.push(
            WindowRecord {
                window: t,
                mse: mse(y, &predicted)?,
                provenance: Provenance::Random,
                similarity: None,
            },
            WindowTiming { window: t, train_seconds: 0.0, predict_seconds },
        );
    }
    report.timings.ledger = ledger;
    Ok(report.finish())
}

/// Model reuse with the similarity decision made online, window by window.
///
/// At each `t >= 1` the forecast of window `t` is compared with earlier
/// windows. If a window `j < t - 1` is close enough, the model registered for
/// the root of `j`'s similarity chain predicts window `t` and is aliased under
/// `t - 1`. Otherwise a new model is fit on window `t - 1` and registered there.
pub fn run_model_reuse(
    windows: &[Window<'_>],
    spec: &LearnerSpec,
    config: &SimilarityConfig,
    registry: &mut ModelRegistry,
) -> Result<StrategyReport> {
    require_windows(windows)?;
    let mut tracker = SimilarityTracker::new(windows, *config)?;
    let mut map = SimilarityMap::new();
    let mut report = reuse_loop(windows, spec, registry, |t, ledger| {
        let decision = tracker.decide(t, ledger)?;
        Ok(match decision.entry {
            Some(entry) => {
                map.insert(t, entry)?;
                Some((resolve_root(&map, entry.source), Some(entry)))
            }
            None => None,
        })
    })?;
    report.similarity = Some(*config);
    Ok(report)
}

/// Model reuse driven by a similarity map computed beforehand, looked up the
/// way the original loop does: the key for test window `t` is
/// `round(t * size / size) - 1` under ES and `round(t * size / size)` under SA.
pub fn run_model_reuse_precomputed(
    windows: &[Window<'_>],
    spec: &LearnerSpec,
    map: &SimilarityMap,
    forecaster: Forecaster,
    registry: &mut ModelRegistry,
) -> Result<StrategyReport> {
    require_windows(windows)?;
    let size = windows[0].len();
    reuse_loop(windows, spec, registry, |t, _| {
        let key = window_index_for_offset(t * size, size, forecaster);
        Ok(map.get(key).map(|e| (resolve_root(map, key), Some(*e))))
    })
}

fn reuse_loop(
    windows: &[Window<'_>],
    spec: &LearnerSpec,
    registry: &mut ModelRegistry,
    mut decide: impl FnMut(usize, &mut CostLedger) -> Result<Option<(usize, Option<SimilarityEntry>)>>,
) -> Result<StrategyReport> {
    let mut ledger = CostLedger::default();
    let mut report = StrategyReport::new(StrategyKind::Reuse, windows, CostLedger::default());
    report.learner = Some(*spec);
    for t in 1..windows.len() {
        let (record, timing) = match decide(t, &mut ledger)? {
            Some((root, entry)) => {
                let model = registry.model_for(root)?;
                let (err, predict_seconds) = score(model, &windows[t], &mut ledger)?;
                registry.alias(t - 1, root)?;
                (
                    WindowRecord {
                        window: t,
                        mse: err,
                        provenance: Provenance::ReusedFrom { source: root },
                        similarity: entry,
                    },
                    WindowTiming { window: t, train_seconds: 0.0, predict_seconds },
                )
            }
            None => {
                let model = train(spec, &windows[t - 1], &mut ledger)?;
                let (err, predict_seconds) = score(&model, &windows[t], &mut ledger)?;
                let train_seconds = model.train_time_seconds;
                registry.insert(t - 1, model);
                (
                    WindowRecord {
                        window: t,
                        mse: err,
                        provenance: Provenance::New { trained_on: t - 1 },
                        similarity: None,
                    },
                    WindowTiming { window: t, train_seconds, predict_seconds },
                )
            }
        };
        report.push(record, timing);
    }
    report.timings.ledger = ledger;
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use chrono::{NaiveDate, TimeDelta};

    use super::*;
    use crate::ingest::TimeSeriesDataset;
    use crate::similarity::{Metric, SimilarityThreshold};
    use crate::windowing::segment;

    fn dataset(y: Vec<f64>, spd: u32) -> TimeSeriesDataset {
        let t0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let step = 86_400 / i64::from(spd);
        let ts = (0..y.len()).map(|i| t0 + TimeDelta::seconds(step * i as i64)).collect();
        let x = (0..y.len()).map(|i| (i % spd as usize) as f64).collect();
        TimeSeriesDataset::new(ts, vec!["hour".into()], x, "y", y, spd).unwrap()
    }

    #[test]
    fn constant_series_is_perfect() {
        let ds = dataset(vec![0.4; 8 * 6], 8);
        let w = segment(&ds, 2).unwrap();
        let spec = LearnerSpec::boosted().with_estimators(5);
        let r = run_periodic(&w, &spec).unwrap();
        assert!(r.window_mses().iter().all(|&e| e == 0.0));
        assert_eq!(r.timings.ledger.count(Operation::Training), 2);
        assert_eq!(r.fits, 2);
    }

    #[test]
    fn two_windows_stationary_equals_periodic() {
        let y: Vec<f64> = (0..32).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let ds = dataset(y, 8);
        let w = segment(&ds, 2).unwrap();
        let spec = LearnerSpec::bagged().with_estimators(5);
        let s = run_stationary(&w, &spec).unwrap();
        let p = run_periodic(&w, &spec).unwrap();
        assert_eq!(s.window_mses(), p.window_mses());
        assert!(matches!(run_periodic(&w[..1], &spec), Err(Error::TooFewWindows { .. })));
    }

    #[test]
    fn random_is_deterministic_and_degenerate_on_constants() {
        let ds = dataset(vec![2.0; 24], 4);
        let w = segment(&ds, 2).unwrap();
        let r = run_random(&w, 9).unwrap();
        assert!(r.window_mses().iter().all(|&e| e == 0.0));

        let y: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let ds = dataset(y, 4);
        let w = segment(&ds, 2).unwrap();
        assert_eq!(run_random(&w, 9).unwrap().records, run_random(&w, 9).unwrap().records);
    }

    #[test]
    fn nested_chain_serves_the_root_model() {
        // small-scale analogue of 19 -> 15 -> 12
        let y: Vec<f64> = (0..10 * 8).map(|i| ((i * 7919) % 97) as f64 / 97.0).collect();
        let ds = dataset(y, 4);
        let w = segment(&ds, 2).unwrap();
        let spec = LearnerSpec::boosted().with_estimators(3);
        let map: SimilarityMap = [(9, 6), (6, 4)].into_iter().collect();
        let mut registry = ModelRegistry::default();
        let r = run_model_reuse_precomputed(&w, &spec, &map, Forecaster::Sa, &mut registry).unwrap();
        let rec = &r.records[8];
        assert_eq!(rec.window, 9);
        assert_eq!(rec.provenance, Provenance::ReusedFrom { source: 4 });
        let served = registry.model_for(8).unwrap();
        assert_eq!(served.trained_on_window, 4);
        let expected = mse(w[9].target(), &fit_window(&spec, &w[4]).unwrap().predict_window(&w[9]).unwrap()).unwrap();
        assert_eq!(rec.mse, expected);
    }

    #[test]
    fn precomputed_matches_online_under_sa() {
        let y: Vec<f64> = (0..12 * 8)
            .map(|i| if (i / 8) % 2 == 0 { (i % 8) as f64 } else { 10.0 + (i % 8) as f64 * 0.5 })
            .collect();
        let ds = dataset(y, 4);
        let w = segment(&ds, 2).unwrap();
        let spec = LearnerSpec::boosted().with_estimators(3);
        let config = SimilarityConfig::new(Forecaster::Sa, Metric::Wd).with_threshold(SimilarityThreshold::Quantile(0.25));
        let online = run_model_reuse(&w, &spec, &config, &mut ModelRegistry::default()).unwrap();
        let map = crate::similarity::build_similarity_map(&w, &config).unwrap();
        let offline =
            run_model_reuse_precomputed(&w, &spec, &map, Forecaster::Sa, &mut ModelRegistry::default()).unwrap();
        assert_eq!(online.records, offline.records);
        assert!(online.reduced_training_count > 0);
    }
}
