use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::distance::{distance, EmpiricalDistribution, Metric, DEFAULT_TVD_BINS};
use crate::error::{Error, Result};
use crate::evaluation::{CostLedger, Operation};
use crate::forecasting::{forecast_window, ForecastDistribution, Forecaster};
use crate::windowing::Window;

/// When the closest earlier window is close enough to reuse its model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum SimilarityThreshold {
    /// Accept if the best distance is at most this quantile of all pairwise
    /// distances among the windows seen so far.
    Quantile(f64),
    /// Accept if the best distance is at most this value.
    Absolute(f64),
}

impl Default for SimilarityThreshold {
    fn default() -> Self {
        SimilarityThreshold::Quantile(0.25)
    }
}

impl SimilarityThreshold {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SimilarityThreshold::Quantile(q) if q > 0.0 && q < 1.0 => Ok(()),
            SimilarityThreshold::Absolute(t) if t >= 0.0 => Ok(()),
            other => Err(Error::InvalidConfig(format!("invalid threshold {other:?}"))),
        }
    }

    /// Cut-off value given the pairwise distances observed so far. With no
    /// pairs to calibrate on, a quantile rule accepts nothing.
    pub fn resolve(&self, pairwise: &[f64]) -> f64 {
        match *self {
            SimilarityThreshold::Absolute(t) => t,
            SimilarityThreshold::Quantile(q) => {
                if pairwise.is_empty() {
                    return f64::NEG_INFINITY;
                }
                let mut v = pairwise.to_vec();
                v.sort_by(f64::total_cmp);
                quantile_sorted(&v, q)
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SimilarityThreshold::Quantile(q) => format!("quantile({q})"),
            SimilarityThreshold::Absolute(t) => format!("absolute({t})"),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEntry {
    pub source: usize,
    pub distance: f64,
    pub metric: Metric,
}

/// Window index -> earlier window whose model it reuses.
///
/// Every entry points strictly backwards, so following entries always ends.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    entries: BTreeMap<usize, SimilarityEntry>,
}

impl SimilarityMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, window: usize, entry: SimilarityEntry) -> Result<()> {
        if entry.source >= window {
            return Err(Error::InvalidConfig(format!(
                "similarity entry {window} -> {} does not point backwards",
                entry.source
            )));
        }
        self.entries.insert(window, entry);
        Ok(())
    }

    pub fn get(&self, window: usize) -> Option<&SimilarityEntry> {
        self.entries.get(&window)
    }

    pub fn contains(&self, window: usize) -> bool {
        self.entries.contains_key(&window)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &SimilarityEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }
}

impl FromIterator<(usize, usize)> for SimilarityMap {
    /// Builds a map from bare `(window, source)` pairs with zero distances.
    ///
    /// # Panics
    /// If a pair does not point backwards.
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut map = SimilarityMap::new();
        for (window, source) in iter {
            map.insert(
                window,
                SimilarityEntry {
                    source,
                    distance: 0.0,
                    metric: Metric::Wd,
                },
            )
            .expect("backward entry");
        }
        map
    }
}

/// Follows entries from `index` until reaching a window with no entry.
pub fn resolve_root(map: &SimilarityMap, index: usize) -> usize {
    let mut current = index;
    while let Some(entry) = map.get(current) {
        assert!(entry.source < current, "similarity chain must decrease");
        current = entry.source;
    }
    current
}

/// Closest candidate to the forecast; ties go to the smallest index. With
/// `exclude_adjacent`, window `for_window - 1` is not a candidate.
pub fn most_similar_prior(
    forecast: &ForecastDistribution,
    priors: &[(usize, &EmpiricalDistribution)],
    metric: Metric,
    tvd_bins: usize,
    exclude_adjacent: bool,
) -> Result<(usize, f64)> {
    let target = EmpiricalDistribution::new(&forecast.clamped())?;
    let adjacent = forecast.for_window.checked_sub(1);
    let mut best: Option<(usize, f64)> = None;
    for &(idx, dist) in priors {
        if exclude_adjacent && Some(idx) == adjacent {
            continue;
        }
        let d = distance(metric, &target, dist, tvd_bins);
        best = match best {
            Some((bi, bd)) if bd < d || (bd == d && bi < idx) => Some((bi, bd)),
            _ => Some((idx, d)),
        };
    }
    best.ok_or(Error::NoCandidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub forecaster: Forecaster,
    pub metric: Metric,
    pub tvd_bins: usize,
    pub threshold: SimilarityThreshold,
    /// ES seasonal period in rows; `None` uses samples per day.
    pub es_seasonal_period: Option<usize>,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            forecaster: Forecaster::Es,
            metric: Metric::Wd,
            tvd_bins: DEFAULT_TVD_BINS,
            threshold: SimilarityThreshold::default(),
            es_seasonal_period: None,
        }
    }
}

impl SimilarityConfig {
    pub fn new(forecaster: Forecaster, metric: Metric) -> Self {
        Self {
            forecaster,
            metric,
            ..Self::default()
        }
    }

    pub fn with_threshold(mut self, threshold: SimilarityThreshold) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_seasonal_period(mut self, rows: usize) -> Self {
        self.es_seasonal_period = Some(rows);
        self
    }
}

/// Outcome of the similarity step for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub window: usize,
    /// Closest candidate and its distance, if any candidate existed.
    pub closest: Option<(usize, f64)>,
    pub threshold: f64,
    /// Entry to record when the model of an earlier window should be reused.
    pub entry: Option<SimilarityEntry>,
}

/// Makes the reuse decision window by window, caching per-window
/// distributions and the pairwise distances used to calibrate the threshold.
pub struct SimilarityTracker<'a, 'w> {
    windows: &'a [Window<'w>],
    config: SimilarityConfig,
    distributions: Vec<EmpiricalDistribution>,
    pairwise: Vec<f64>,
}

impl<'a, 'w> SimilarityTracker<'a, 'w> {
    pub fn new(windows: &'a [Window<'w>], config: SimilarityConfig) -> Result<Self> {
        config.threshold.validate()?;
        Ok(Self {
            windows,
            config,
            distributions: Vec::with_capacity(windows.len()),
            pairwise: Vec::new(),
        })
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    fn seasonal_period(&self) -> usize {
        self.config
            .es_seasonal_period
            .unwrap_or_else(|| self.windows[0].dataset().samples_per_day() as usize)
    }

    fn extend_to(&mut self, upto: usize) -> Result<()> {
        while self.distributions.len() < upto {
            let k = self.distributions.len();
            let next = EmpiricalDistribution::new(self.windows[k].target())?;
            for prev in &self.distributions {
                self.pairwise
                    .push(distance(self.config.metric, prev, &next, self.config.tvd_bins));
            }
            self.distributions.push(next);
        }
        Ok(())
    }

    /// Decides for window `t`, timing forecasting and similarity work into
    /// `ledger`.
    pub fn decide(&mut self, t: usize, ledger: &mut CostLedger) -> Result<Decision> {
        let exclude_adjacent = self.config.forecaster == Forecaster::Sa;
        // window t-1 is never reused from, so t < 2 has no candidate
        if t < 2 {
            return Ok(Decision {
                window: t,
                closest: None,
                threshold: f64::NEG_INFINITY,
                entry: None,
            });
        }

        let started = Instant::now();
        let forecast = forecast_window(
            self.windows,
            t,
            self.config.forecaster,
            self.seasonal_period(),
        )?;
        ledger.record(Operation::Forecasting, started.elapsed().as_secs_f64());

        let started = Instant::now();
        self.extend_to(t)?;
        let priors: Vec<(usize, &EmpiricalDistribution)> =
            self.distributions[..t].iter().enumerate().collect();
        let (source, d) = most_similar_prior(
            &forecast,
            &priors,
            self.config.metric,
            self.config.tvd_bins,
            exclude_adjacent,
        )?;
        let threshold = self.config.threshold.resolve(&self.pairwise);
        ledger.record(Operation::Similarity, started.elapsed().as_secs_f64());

        let accepted = source + 1 < t && d <= threshold;
        Ok(Decision {
            window: t,
            closest: Some((source, d)),
            threshold,
            entry: accepted.then_some(SimilarityEntry {
                source,
                distance: d,
                metric: self.config.metric,
            }),
        })
    }
}

/// Similarity map over all windows: an entry `t -> j` for every window whose
/// forecast is closest to a non-adjacent earlier window `j` within the
/// threshold. Windows without an entry are retrained.
pub fn build_similarity_map(windows: &[Window<'_>], config: &SimilarityConfig) -> Result<SimilarityMap> {
    build_similarity_map_timed(windows, config, &mut CostLedger::default())
}

pub fn build_similarity_map_timed(
    windows: &[Window<'_>],
    config: &SimilarityConfig,
    ledger: &mut CostLedger,
) -> Result<SimilarityMap> {
    if windows.len() < 3 {
        return Err(Error::TooFewWindows {
            needed: 3,
            got: windows.len(),
        });
    }
    let mut tracker = SimilarityTracker::new(windows, *config)?;
    let mut map = SimilarityMap::new();
    for t in 2..windows.len() {
        if let Some(entry) = tracker.decide(t, ledger)?.entry {
            map.insert(t, entry)?;
        }
    }
    Ok(map)
}
