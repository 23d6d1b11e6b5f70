//! Loading, validating and min-max scaling regularly sampled time series.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TIMESTAMP_COLUMN: &str = "timestamp";

/// Timestamped rows of numeric features plus one target column.
///
/// Rows are strictly increasing in time with a constant spacing of
/// `86400 / samples_per_day` seconds. Features are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    timestamps: Vec<NaiveDateTime>,
    feature_names: Vec<String>,
    features: Vec<f64>,
    target_name: String,
    target: Vec<f64>,
    samples_per_day: u32,
}

impl TimeSeriesDataset {
    /// Builds a dataset from already-regular columns, checking every invariant.
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        feature_names: Vec<String>,
        features: Vec<f64>,
        target_name: impl Into<String>,
        target: Vec<f64>,
        samples_per_day: u32,
    ) -> Result<Self> {
        let step = sampling_step(samples_per_day)?;
        let n = timestamps.len();
        if target.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} timestamps but {} target values",
                n,
                target.len()
            )));
        }
        if features.len() != n * feature_names.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature cells do not form {} rows of {} features",
                features.len(),
                n,
                feature_names.len()
            )));
        }
        if features.iter().chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite value".into()));
        }
        for (row, pair) in timestamps.windows(2).enumerate() {
            let gap = pair[1] - pair[0];
            if gap != step {
                return Err(Error::IrregularSampling {
                    row: row + 1,
                    detail: format!("gap of {} s, expected {} s", gap.num_seconds(), step.num_seconds()),
                });
            }
        }
        Ok(Self {
            timestamps,
            feature_names,
            features,
            target_name: target_name.into(),
            target,
            samples_per_day,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn samples_per_day(&self) -> u32 {
        self.samples_per_day
    }

    pub fn spacing(&self) -> TimeDelta {
        TimeDelta::seconds(86_400 / i64::from(self.samples_per_day))
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Row-major feature matrix.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.n_features();
        &self.features[i * k..(i + 1) * k]
    }

    /// Values of a feature or of the target, by name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        if name == self.target_name {
            return Ok(self.target.clone());
        }
        let j = self
            .feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        let k = self.n_features();
        Ok((0..self.len()).map(|i| self.features[i * k + j]).collect())
    }
}

/// Where the min-max scaler takes its per-column range from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    /// Whole dataset.
    #[default]
    Full,
    /// First `n` rows only; later rows may fall outside [0, 1].
    Prefix(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn scale(&self, x: f64) -> f64 {
        if self.max == self.min {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn unscale(&self, x: f64) -> f64 {
        x * (self.max - self.min) + self.min
    }
}

/// Per-column ranges used by [`normalize_min_max`]: features first, target last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub columns: Vec<ColumnRange>,
}

impl NormalizationParams {
    pub fn target(&self) -> &ColumnRange {
        self.columns.last().expect("target range is always present")
    }

    /// Inverse transform. Constant columns come back as their single value.
    pub fn denormalize(&self, ds: &TimeSeriesDataset) -> TimeSeriesDataset {
        self.map(ds, ColumnRange::unscale)
    }

    fn map(&self, ds: &TimeSeriesDataset, f: fn(&ColumnRange, f64) -> f64) -> TimeSeriesDataset {
        let k = ds.n_features();
        let features = ds
            .features
            .iter()
            .enumerate()
            .map(|(idx, &x)| f(&self.columns[idx % k.max(1)], x))
            .collect();
        let target = ds.target.iter().map(|&y| f(self.target(), y)).collect();
        TimeSeriesDataset {
            features,
            target,
            ..ds.clone()
        }
    }
}

/// Min-max scales every feature column and the target.
///
/// `x' = (x - min) / (max - min)` with min/max taken over the rows in `scope`;
/// constant columns map to 0. No clamping is applied.
pub fn normalize_min_max(
    ds: &TimeSeriesDataset,
    scope: FitScope,
) -> Result<(TimeSeriesDataset, NormalizationParams)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let fit_rows = match scope {
        FitScope::Full => ds.len(),
        FitScope::Prefix(n) if n >= 1 && n <= ds.len() => n,
        FitScope::Prefix(n) => {
            return Err(Error::InvalidConfig(format!(
                "prefix({n}) outside 1..={}",
                ds.len()
            )))
        }
    };
    let k = ds.n_features();
    let range_of = |name: &str, values: &mut dyn Iterator<Item = f64>| {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        ColumnRange {
            name: name.to_string(),
            min,
            max,
        }
    };
    let mut columns: Vec<ColumnRange> = (0..k)
        .map(|j| {
            range_of(
                &ds.feature_names[j],
                &mut (0..fit_rows).map(|i| ds.features[i * k + j]),
            )
        })
        .collect();
    columns.push(range_of(
        &ds.target_name,
        &mut ds.target[..fit_rows].iter().copied(),
    ));
    let params = NormalizationParams { columns };
    let scaled = params.map(ds, ColumnRange::scale);
    Ok((scaled, params))
}

/// Mean of `column` per calendar day, in date order.
pub fn daily_average(ds: &TimeSeriesDataset, column: &str) -> Result<Vec<(NaiveDate, f64)>> {
    let values = ds.column(column)?;
    let mut days: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for (ts, v) in ds.timestamps.iter().zip(values) {
        let slot = days.entry(ts.date()).or_insert((0.0, 0));
        slot.0 += v;
        slot.1 += 1;
    }
    Ok(days
        .into_iter()
        .map(|(d, (sum, n))| (d, sum / n as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub timestamp_column: String,
    /// chrono format string; ISO-8601 variants are tried when unset.
    pub timestamp_format: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            timestamp_column: DEFAULT_TIMESTAMP_COLUMN.to_string(),
            timestamp_format: None,
        }
    }
}

/// Loads a CSV with a `timestamp` column, using default [`LoadOptions`].
pub fn load_dataset(
    path: impl AsRef<Path>,
    target_name: &str,
    samples_per_day: u32,
) -> Result<TimeSeriesDataset> {
    load_dataset_with(path, target_name, samples_per_day, &LoadOptions::default())
}

/// Loads a CSV time series.
///
/// Rows are sorted by timestamp. A single missing sampling step is repaired
/// by repeating the previous row; any other gap, and any repeated timestamp,
/// is [`Error::IrregularSampling`].
pub fn load_dataset_with(
    path: impl AsRef<Path>,
    target_name: &str,
    samples_per_day: u32,
    opts: &LoadOptions,
) -> Result<TimeSeriesDataset> {
    let path = path.as_ref();
    let step = sampling_step(samples_per_day)?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();

    let ts_col = header
        .iter()
        .position(|h| *h == opts.timestamp_column)
        .ok_or_else(|| Error::MissingTimestamp(opts.timestamp_column.clone()))?;
    let target_col = header
        .iter()
        .position(|h| h == target_name)
        .ok_or_else(|| Error::MissingTarget(target_name.to_string()))?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != ts_col && c != target_col)
        .collect();

    let mut rows: Vec<(NaiveDateTime, Vec<f64>, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |c: usize| record.get(c).unwrap_or("");
        let malformed = |c: usize| Error::MalformedRow {
            line,
            column: header[c].clone(),
            value: cell(c).to_string(),
        };
        let ts = parse_timestamp(cell(ts_col), opts.timestamp_format.as_deref())
            .ok_or_else(|| malformed(ts_col))?;
        let number = |c: usize| {
            cell(c)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(c))
        };
        let feats = feature_cols.iter().map(|&c| number(c)).collect::<Result<Vec<_>>>()?;
        let y = number(target_col)?;
        rows.push((ts, feats, y));
    }
    rows.sort_by_key(|r| r.0);

    let mut timestamps = Vec::with_capacity(rows.len());
    let mut features = Vec::with_capacity(rows.len() * feature_cols.len());
    let mut target = Vec::with_capacity(rows.len());
    for (i, (ts, feats, y)) in rows.iter().enumerate() {
        if let Some(&prev) = timestamps.last() {
            let gap: TimeDelta = *ts - prev;
            if gap == step * 2 {
                // one missing step: forward-fill from the previous row
                let k = feature_cols.len();
                let last_row = features[features.len() - k..].to_vec();
                let last_y = *target.last().expect("non-empty");
                timestamps.push(prev + step);
                features.extend(last_row);
                target.push(last_y);
            } else if gap != step {
                return Err(Error::IrregularSampling {
                    row: i,
                    detail: format!(
                        "{} follows {} (gap {} s, expected {} s)",
                        ts,
                        prev,
                        gap.num_seconds(),
                        step.num_seconds()
                    ),
                });
            }
        }
        timestamps.push(*ts);
        features.extend_from_slice(feats);
        target.push(*y);
    }

    let feature_names = feature_cols.iter().map(|&c| header[c].clone()).collect();
    TimeSeriesDataset::new(
        timestamps,
        feature_names,
        features,
        target_name,
        target,
        samples_per_day,
    )
}

/// Writes `ds` as CSV: timestamp, features, then the target. Values are
/// printed in shortest round-trip form, so loading the file back is lossless.
pub fn save_dataset(ds: &TimeSeriesDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec![DEFAULT_TIMESTAMP_COLUMN.to_string()];
    header.extend(ds.feature_names.iter().cloned());
    header.push(ds.target_name.clone());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..ds.len() {
        let mut rec = vec![ds.timestamps[i].format("%Y-%m-%dT%H:%M:%S").to_string()];
        rec.extend(ds.row(i).iter().map(|v| v.to_string()));
        rec.push(ds.target[i].to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn sampling_step(samples_per_day: u32) -> Result<TimeDelta> {
    if samples_per_day == 0 || 86_400 % samples_per_day != 0 {
        return Err(Error::InvalidConfig(format!(
            "samples_per_day must be a positive divisor of 86400, got {samples_per_day}"
        )));
    }
    Ok(TimeDelta::seconds(86_400 / i64::from(samples_per_day)))
}

fn parse_timestamp(s: &str, format: Option<&str>) -> Option<NaiveDateTime> {
    if let Some(fmt) = format {
        return NaiveDateTime::parse_from_str(s, fmt).ok().or_else(|| {
            NaiveDate::parse_from_str(s, fmt)
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        });
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_utc()))
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}
