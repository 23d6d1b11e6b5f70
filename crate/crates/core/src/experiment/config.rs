use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::DEFAULT_HOURLY_RATE;
use crate::forecasting::Forecaster;
use crate::ingest::{FitScope, LoadOptions, DEFAULT_TIMESTAMP_COLUMN};
use crate::learners::{LearnerKind, LearnerSpec};
use crate::similarity::{Metric, SimilarityConfig, SimilarityThreshold, DEFAULT_TVD_BINS};
use crate::windowing::{DEFAULT_CANDIDATE_DAYS, MONTH_DAYS};

/// Everything one experiment depends on. Loaded from TOML:
///
/// ```toml
/// seed = 7
/// output = "out"
///
/// [dataset]
/// path = "data/nsw_electricity.csv"
/// target = "nswprice"
/// samples_per_day = 48
///
/// [window]
/// length = "auto"          # or a number of days
///
/// [learner]
/// kind = "bagged_trees"
/// n_estimators = 50
///
/// [similarity]
/// forecaster = "sa"
/// metric = "tvd"
/// threshold = { rule = "quantile", value = 0.25 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub similarity: SimilaritySection,
    #[serde(default = "default_rate")]
    pub hourly_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_rate() -> f64 {
    DEFAULT_HOURLY_RATE
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub target: String,
    #[serde(default = "default_spd")]
    pub samples_per_day: u32,
    #[serde(default = "default_ts_column")]
    pub timestamp_column: String,
    #[serde(default)]
    pub timestamp_format: Option<String>,
    /// Min-max scale features and target before anything else.
    #[serde(default = "yes")]
    pub normalize: bool,
    /// Fit the scaler on the first `n` rows only.
    #[serde(default)]
    pub fit_rows: Option<usize>,
}

fn default_spd() -> u32 {
    48
}

fn default_ts_column() -> String {
    DEFAULT_TIMESTAMP_COLUMN.to_string()
}

fn yes() -> bool {
    true
}

impl DatasetConfig {
    pub fn new(path: impl Into<PathBuf>, target: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            target: target.into(),
            samples_per_day: default_spd(),
            timestamp_column: default_ts_column(),
            timestamp_format: None,
            normalize: true,
            fit_rows: None,
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            timestamp_column: self.timestamp_column.clone(),
            timestamp_format: self.timestamp_format.clone(),
        }
    }

    pub fn fit_scope(&self) -> FitScope {
        self.fit_rows.map_or(FitScope::Full, FitScope::Prefix)
    }
}

/// Window length in days, or `auto` to search the candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLength {
    Days(u32),
    Auto,
}

impl std::str::FromStr for WindowLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(WindowLength::Auto);
        }
        s.parse::<u32>()
            .ok()
            .filter(|&d| d > 0)
            .map(WindowLength::Days)
            .ok_or_else(|| Error::InvalidConfig(format!("window length `{s}` is neither a day count nor `auto`")))
    }
}

impl Serialize for WindowLength {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WindowLength::Days(d) => s.serialize_u32(*d),
            WindowLength::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for WindowLength {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Days(u32),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Days(0) => Err(serde::de::Error::custom("window length must be positive")),
            Raw::Days(n) => Ok(WindowLength::Days(n)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default = "default_length")]
    pub length: WindowLength,
    #[serde(default = "default_candidates")]
    pub candidates: Vec<u32>,
}

fn default_length() -> WindowLength {
    WindowLength::Days(MONTH_DAYS)
}

fn default_candidates() -> Vec<u32> {
    DEFAULT_CANDIDATE_DAYS.to_vec()
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            length: default_length(),
            candidates: default_candidates(),
        }
    }
}

/// Learner kind plus optional overrides of its defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    #[serde(default = "default_kind")]
    pub kind: LearnerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_estimators: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_samples_leaf: Option<usize>,
}

fn default_kind() -> LearnerKind {
    LearnerKind::BoostedTrees
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            n_estimators: None,
            max_depth: None,
            learning_rate: None,
            min_samples_leaf: None,
        }
    }
}

impl LearnerConfig {
    pub fn spec(&self, seed: u64) -> LearnerSpec {
        let mut spec = LearnerSpec::of_kind(self.kind).with_seed(seed);
        if let Some(n) = self.n_estimators {
            spec.n_estimators = n;
        }
        if let Some(d) = self.max_depth {
            spec.max_depth = d;
        }
        if let Some(lr) = self.learning_rate {
            spec.learning_rate = lr;
        }
        if let Some(l) = self.min_samples_leaf {
            spec.min_samples_leaf = l;
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySection {
    #[serde(default = "default_forecaster")]
    pub forecaster: Forecaster,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default = "default_bins")]
    pub tvd_bins: usize,
    #[serde(default)]
    pub threshold: SimilarityThreshold,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub es_seasonal_period: Option<usize>,
}

fn default_forecaster() -> Forecaster {
    Forecaster::Es
}

fn default_metric() -> Metric {
    Metric::Wd
}

fn default_bins() -> usize {
    DEFAULT_TVD_BINS
}

impl Default for SimilaritySection {
    fn default() -> Self {
        Self {
            forecaster: default_forecaster(),
            metric: default_metric(),
            tvd_bins: default_bins(),
            threshold: SimilarityThreshold::default(),
            es_seasonal_period: None,
        }
    }
}

impl SimilaritySection {
    pub fn config(&self) -> SimilarityConfig {
        SimilarityConfig {
            forecaster: self.forecaster,
            metric: self.metric,
            tvd_bins: self.tvd_bins,
            threshold: self.threshold,
            es_seasonal_period: self.es_seasonal_period,
        }
    }
}

impl ExperimentConfig {
    /// Config with every default, for the given dataset.
    pub fn new(path: impl Into<PathBuf>, target: impl Into<String>) -> Self {
        Self {
            dataset: DatasetConfig::new(path, target),
            window: WindowConfig::default(),
            learner: LearnerConfig::default(),
            similarity: SimilaritySection::default(),
            hourly_rate: DEFAULT_HOURLY_RATE,
            seed: 0,
            output: default_output(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            if config.dataset.path.is_relative() {
                config.dataset.path = base.join(&config.dataset.path);
            }
            if config.output.is_relative() {
                config.output = base.join(&config.output);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn learner_spec(&self) -> LearnerSpec {
        self.learner.spec(self.seed)
    }

    pub fn similarity_config(&self) -> SimilarityConfig {
        self.similarity.config()
    }

    /// Checks every setting that can be checked without loading the data.
    pub fn validate(&self) -> Result<()> {
        if !self.dataset.path.is_file() {
            return Err(Error::io(
                &self.dataset.path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "dataset not found"),
            ));
        }
        if self.window.candidates.is_empty() || self.window.candidates.contains(&0) {
            return Err(Error::InvalidConfig("candidates must be positive day counts".into()));
        }
        if self.similarity.tvd_bins == 0 {
            return Err(Error::InvalidConfig("tvd_bins must be at least 1".into()));
        }
        if self.similarity.es_seasonal_period == Some(0) {
            return Err(Error::InvalidConfig("es_seasonal_period must be positive".into()));
        }
        if !(self.hourly_rate.is_finite() && self.hourly_rate >= 0.0) {
            return Err(Error::InvalidConfig(format!("hourly_rate {}", self.hourly_rate)));
        }
        self.similarity.threshold.validate()?;
        self.learner_spec().validate()
    }
}
