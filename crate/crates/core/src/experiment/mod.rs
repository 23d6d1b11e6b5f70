//! Config-driven experiment commands and the files they write.
//!
//! Each `cmd_*` function loads the dataset named in the config, does its work,
//! writes CSV/JSON/SVG files into the output directory and returns what it
//! computed.

mod config;
mod svg;

use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

pub use config::{
    DatasetConfig, ExperimentConfig, LearnerConfig, SimilaritySection, WindowConfig, WindowLength,
};
pub use svg::FiveNumber;

use crate::error::{Error, Result};
use crate::evaluation::{compare_strategies, ComparisonResult, CostLedger, Operation};
use crate::ingest::{daily_average, load_dataset_with, normalize_min_max, TimeSeriesDataset};
use crate::similarity::{quantile_sorted, shared_histogram, EmpiricalDistribution};
use crate::strategies::{
    prune_registry, run_model_reuse, run_periodic, run_random, run_stationary, ModelRegistry, Provenance,
    StrategyKind, StrategyReport,
};
use crate::windowing::{segment, select_segment_length, SegmentLengthReport, Window};

/// Loads the dataset exactly as written on disk.
pub fn load_raw(config: &ExperimentConfig) -> Result<TimeSeriesDataset> {
    let d = &config.dataset;
    load_dataset_with(&d.path, &d.target, d.samples_per_day, &d.load_options())
}

/// Loads the dataset and applies the configured scaling.
pub fn load_prepared(config: &ExperimentConfig) -> Result<TimeSeriesDataset> {
    let raw = load_raw(config)?;
    if !config.dataset.normalize {
        return Ok(raw);
    }
    Ok(normalize_min_max(&raw, config.dataset.fit_scope())?.0)
}

fn dataset_name(config: &ExperimentConfig) -> String {
    config
        .dataset
        .path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned())
}

fn out_path(config: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&config.output).map_err(|e| Error::io(&config.output, e))?;
    Ok(config.output.join(name))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn stamp(t: NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S").to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: usize,
    pub features: usize,
    pub samples_per_day: u32,
    pub spacing_seconds: i64,
    pub first: NaiveDateTime,
    pub last: NaiveDateTime,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} rows, {} features, {}/day",
            self.rows, self.features, self.samples_per_day
        )?;
        write!(
            f,
            "spacing {} s, {} .. {}",
            self.spacing_seconds, self.first, self.last
        )
    }
}

/// Loads and checks the dataset.
pub fn cmd_validate(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let ds = load_raw(config)?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(ValidationReport {
        rows: ds.len(),
        features: ds.n_features(),
        samples_per_day: ds.samples_per_day(),
        spacing_seconds: ds.spacing().num_seconds(),
        first: ds.timestamps()[0],
        last: ds.timestamps()[ds.len() - 1],
    })
}

/// Window length actually used, with the search that chose it if any.
#[derive(Debug, Clone)]
pub struct WindowChoice {
    pub days: u32,
    pub search: Option<SegmentLengthReport>,
    pub search_ledger: CostLedger,
}

pub fn resolve_window(config: &ExperimentConfig, ds: &TimeSeriesDataset) -> Result<WindowChoice> {
    match config.window.length {
        WindowLength::Days(days) => Ok(WindowChoice {
            days,
            search: None,
            search_ledger: CostLedger::default(),
        }),
        WindowLength::Auto => {
            let mut ledger = CostLedger::with_rate(config.hourly_rate)?;
            let report = select_segment_length(ds, &config.window.candidates, &config.learner_spec(), &mut ledger)?;
            Ok(WindowChoice {
                days: report.chosen,
                search: Some(report),
                search_ledger: ledger,
            })
        }
    }
}

/// Five-number summary with linearly interpolated quartiles.
pub fn five_number(values: &[f64]) -> FiveNumber {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    FiveNumber {
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutput {
    pub window_days: u32,
    pub summaries: Vec<FiveNumber>,
    pub files: Vec<PathBuf>,
}

/// Daily averages, per-window histograms and box-plot summaries of the
/// target, as CSV and SVG.
pub fn cmd_analyze(config: &ExperimentConfig) -> Result<AnalyzeOutput> {
    config.validate()?;
    let raw = load_raw(config)?;
    let days = match config.window.length {
        WindowLength::Days(d) => d,
        WindowLength::Auto => resolve_window(config, &load_prepared(config)?)?.days,
    };
    let windows = segment(&raw, days)?;
    let mut files = Vec::new();

    let daily = daily_average(&raw, raw.target_name())?;
    let path = out_path(config, "daily_average.csv")?;
    let rows: Vec<Vec<String>> = daily
        .iter()
        .map(|(d, v)| vec![d.to_string(), v.to_string()])
        .collect();
    write_csv(&path, &["date", raw.target_name()], &rows)?;
    files.push(path);

    let summaries: Vec<FiveNumber> = windows.iter().map(|w| five_number(w.target())).collect();
    let path = out_path(config, "window_boxplots.csv")?;
    let rows: Vec<Vec<String>> = windows
        .iter()
        .zip(&summaries)
        .map(|(w, s)| {
            vec![
                w.index.to_string(),
                stamp(w.first_timestamp()),
                stamp(w.last_timestamp()),
                s.min.to_string(),
                s.q1.to_string(),
                s.median.to_string(),
                s.q3.to_string(),
                s.max.to_string(),
            ]
        })
        .collect();
    write_csv(&path, &["window", "start", "end", "min", "q1", "median", "q3", "max"], &rows)?;
    files.push(path);

    // histograms share the range of every windowed value so they line up
    let bins = config.similarity.tvd_bins;
    let all: Vec<f64> = windows.iter().flat_map(|w| w.target().iter().copied()).collect();
    let whole = EmpiricalDistribution::new(&all)?;
    let (lo, hi) = (whole.min(), whole.max());
    let mut series = Vec::with_capacity(windows.len());
    let mut rows = Vec::new();
    for w in &windows {
        let dist = EmpiricalDistribution::new(w.target())?;
        let (mass, _) = shared_histogram(&dist, &whole, bins);
        for (b, m) in mass.iter().enumerate() {
            let width = (hi - lo) / bins as f64;
            rows.push(vec![
                w.index.to_string(),
                stamp(w.first_timestamp()),
                b.to_string(),
                (lo + width * b as f64).to_string(),
                (lo + width * (b + 1) as f64).to_string(),
                ((m * w.len() as f64).round() as usize).to_string(),
                m.to_string(),
            ]);
        }
        series.push((format!("window {} ({})", w.index, w.first_timestamp().date()), mass));
    }
    let path = out_path(config, "window_histograms.csv")?;
    write_csv(&path, &["window", "start", "bin", "lower", "upper", "count", "frequency"], &rows)?;
    files.push(path);

    let name = dataset_name(config);
    let path = out_path(config, "distribution.svg")?;
    write_text(
        &path,
        &svg::histogram_overlay(&format!("{name}: {} per {days}-day window", raw.target_name()), lo, hi, &series),
    )?;
    files.push(path);

    let labelled: Vec<(String, FiveNumber)> = windows
        .iter()
        .zip(&summaries)
        .map(|(w, s)| (format!("window {} ({})", w.index, w.first_timestamp().date()), *s))
        .collect();
    let path = out_path(config, "boxplot.svg")?;
    write_text(&path, &svg::box_plot(&format!("{name}: {} by window", raw.target_name()), &labelled))?;
    files.push(path);

    Ok(AnalyzeOutput {
        window_days: days,
        summaries,
        files,
    })
}

/// Runs the segment-length search over the configured candidates.
pub fn cmd_select_window(config: &ExperimentConfig) -> Result<SegmentLengthReport> {
    config.validate()?;
    let ds = load_prepared(config)?;
    let mut ledger = CostLedger::with_rate(config.hourly_rate)?;
    let report = select_segment_length(&ds, &config.window.candidates, &config.learner_spec(), &mut ledger)?;
    let rows: Vec<Vec<String>> = report
        .candidates
        .iter()
        .map(|c| {
            vec![
                c.days.to_string(),
                c.windows.to_string(),
                c.mse.map_or_else(String::new, |m| m.to_string()),
                (c.days == report.chosen).to_string(),
            ]
        })
        .collect();
    write_csv(&out_path(config, "segment_lengths.csv")?, &["days", "windows", "mse", "chosen"], &rows)?;
    write_json(&out_path(config, "segment_lengths.json")?, &report)?;
    Ok(report)
}

/// Runs one strategy over already segmented windows.
pub fn run_strategy(
    windows: &[Window<'_>],
    config: &ExperimentConfig,
    strategy: StrategyKind,
    registry: &mut ModelRegistry,
) -> Result<StrategyReport> {
    let spec = config.learner_spec();
    match strategy {
        StrategyKind::Stationary => run_stationary(windows, &spec),
        StrategyKind::Periodic => run_periodic(windows, &spec),
        StrategyKind::Random => run_random(windows, config.seed),
        StrategyKind::Reuse => run_model_reuse(windows, &spec, &config.similarity_config(), registry),
    }
}

/// Re-prices a report's ledger at `rate`.
fn priced(mut report: StrategyReport, rate: f64) -> Result<StrategyReport> {
    let mut ledger = CostLedger::with_rate(rate)?;
    ledger.merge(&report.timings.ledger);
    report.timings.ledger = ledger;
    Ok(report)
}

fn window_rows(windows: &[Window<'_>], report: &StrategyReport) -> Vec<Vec<String>> {
    report
        .records
        .iter()
        .zip(&report.timings.per_window)
        .map(|(r, t)| {
            let w = &windows[r.window];
            let (kind, source) = match r.provenance {
                Provenance::New { trained_on } => ("new", trained_on.to_string()),
                Provenance::Kept { trained_on } => ("kept", trained_on.to_string()),
                Provenance::ReusedFrom { source } => ("reused", source.to_string()),
                Provenance::Random => ("random", String::new()),
            };
            vec![
                r.window.to_string(),
                stamp(w.first_timestamp()),
                stamp(w.last_timestamp()),
                r.mse.to_string(),
                kind.to_string(),
                source,
                r.similarity.map_or_else(String::new, |e| e.distance.to_string()),
                t.train_seconds.to_string(),
                t.predict_seconds.to_string(),
            ]
        })
        .collect()
}

fn ledger_rows(ledger: &CostLedger) -> Vec<Vec<String>> {
    ledger
        .totals()
        .iter()
        .map(|c| {
            vec![
                c.operation.label().to_string(),
                c.count.to_string(),
                c.seconds.to_string(),
                c.cost.to_string(),
            ]
        })
        .collect()
}

/// Runs `strategy` and writes its report, per-window table and ledger. For
/// model reuse the similarity map and the registry are written as well.
pub fn cmd_run(config: &ExperimentConfig, strategy: StrategyKind) -> Result<StrategyReport> {
    config.validate()?;
    let ds = load_prepared(config)?;
    let choice = resolve_window(config, &ds)?;
    let windows = segment(&ds, choice.days)?;
    let mut registry = ModelRegistry::default();
    let report = priced(run_strategy(&windows, config, strategy, &mut registry)?, config.hourly_rate)?;

    let name = strategy.label();
    write_json(&out_path(config, &format!("{name}_report.json"))?, &report)?;
    write_csv(
        &out_path(config, &format!("{name}_windows.csv"))?,
        &[
            "window", "start", "end", "mse", "provenance", "source", "distance", "train_seconds", "predict_seconds",
        ],
        &window_rows(&windows, &report),
    )?;
    write_csv(
        &out_path(config, &format!("{name}_ledger.csv"))?,
        &["operation", "count", "seconds", "cost"],
        &ledger_rows(&report.timings.ledger),
    )?;

    if strategy == StrategyKind::Reuse {
        let dataset = dataset_name(config);
        let sim = config.similarity_config();
        let rows: Vec<Vec<String>> = report
            .records
            .iter()
            .filter_map(|r| {
                let entry = r.similarity?;
                let root = match r.provenance {
                    Provenance::ReusedFrom { source } => source,
                    _ => entry.source,
                };
                Some(vec![
                    dataset.clone(),
                    sim.metric.label().to_string(),
                    sim.forecaster.label().to_string(),
                    r.window.to_string(),
                    stamp(windows[r.window].first_timestamp()),
                    entry.source.to_string(),
                    stamp(windows[entry.source].first_timestamp()),
                    root.to_string(),
                    entry.distance.to_string(),
                ])
            })
            .collect();
        write_csv(
            &out_path(config, "similarity_map.csv")?,
            &[
                "dataset", "metric", "forecaster", "window", "window_start", "similar_window", "similar_start",
                "root_window", "distance",
            ],
            &rows,
        )?;

        let last = windows[windows.len() - 1].last_timestamp();
        prune_registry(&mut registry, last);
        let rows: Vec<Vec<String>> = registry
            .windows()
            .map(|(w, id)| {
                let m = registry.model(id).expect("registry entries resolve");
                vec![
                    w.to_string(),
                    id.to_string(),
                    m.trained_on_window.to_string(),
                    stamp(m.trained_at),
                ]
            })
            .collect();
        write_csv(
            &out_path(config, "registry.csv")?,
            &["window", "model_id", "trained_on_window", "trained_at"],
            &rows,
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub strategy: StrategyKind,
    pub fits: usize,
    pub reduced_training: usize,
    pub training_seconds: f64,
    pub prediction_seconds: f64,
    pub forecasting_seconds: f64,
    pub similarity_seconds: f64,
    pub segment_search_seconds: f64,
    pub total_seconds: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTimings {
    pub costs: Vec<CostRow>,
    /// Largest of periodic retraining's operations: segment search (when
    /// run) and training plus prediction.
    pub periodic_max_operation_seconds: f64,
    /// Largest of model reuse's operations: forecasting, similarity, and
    /// training plus prediction.
    pub reuse_max_operation_seconds: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOutput {
    pub dataset: String,
    pub window_days: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_search: Option<SegmentLengthReport>,
    pub reports: Vec<StrategyReport>,
    pub comparisons: Vec<ComparisonResult>,
    pub timings: CompareTimings,
}

impl CompareOutput {
    pub fn report(&self, kind: StrategyKind) -> &StrategyReport {
        self.reports
            .iter()
            .find(|r| r.strategy == kind)
            .expect("every strategy is run")
    }
}

fn cost_row(report: &StrategyReport, search: &CostLedger, rate: f64) -> CostRow {
    let l = &report.timings.ledger;
    let search_seconds = if report.strategy == StrategyKind::Periodic {
        search.total_seconds()
    } else {
        0.0
    };
    let total = l.total_seconds() + search_seconds;
    CostRow {
        strategy: report.strategy,
        fits: report.fits,
        reduced_training: report.reduced_training_count,
        training_seconds: l.seconds(Operation::Training),
        prediction_seconds: l.seconds(Operation::Prediction),
        forecasting_seconds: l.seconds(Operation::Forecasting),
        similarity_seconds: l.seconds(Operation::Similarity),
        segment_search_seconds: search_seconds,
        total_seconds: total,
        cost: rate * (total / 60.0) / 60.0,
    }
}

/// Runs all four strategies under one config and compares them.
pub fn cmd_compare(config: &ExperimentConfig) -> Result<CompareOutput> {
    config.validate()?;
    let ds = load_prepared(config)?;
    let choice = resolve_window(config, &ds)?;
    let windows = segment(&ds, choice.days)?;
    let mut reports = Vec::with_capacity(4);
    for kind in StrategyKind::ALL {
        let report = run_strategy(&windows, config, kind, &mut ModelRegistry::default())?;
        reports.push(priced(report, config.hourly_rate)?);
    }
    let comparisons = compare_strategies(&reports)?;

    let costs: Vec<CostRow> = reports
        .iter()
        .map(|r| cost_row(r, &choice.search_ledger, config.hourly_rate))
        .collect();
    let by = |k: StrategyKind| costs.iter().find(|c| c.strategy == k).expect("row per strategy");
    let p = by(StrategyKind::Periodic);
    let r = by(StrategyKind::Reuse);
    let periodic_max = p.segment_search_seconds.max(p.training_seconds + p.prediction_seconds);
    let reuse_max = r
        .forecasting_seconds
        .max(r.similarity_seconds)
        .max(r.training_seconds + r.prediction_seconds);
    let timings = CompareTimings {
        periodic_max_operation_seconds: periodic_max,
        reuse_max_operation_seconds: reuse_max,
        ratio: if reuse_max > 0.0 { periodic_max / reuse_max } else { f64::INFINITY },
        costs,
    };
    let output = CompareOutput {
        dataset: dataset_name(config),
        window_days: choice.days,
        segment_search: choice.search,
        reports,
        comparisons,
        timings,
    };
    write_compare_files(config, &windows, &output)?;
    Ok(output)
}

fn write_compare_files(config: &ExperimentConfig, windows: &[Window<'_>], out: &CompareOutput) -> Result<()> {
    write_json(&out_path(config, "compare.json")?, out)?;

    let learner = config.learner.kind.label();
    let mut row = vec![out.dataset.clone(), learner.to_string(), out.window_days.to_string()];
    row.extend(StrategyKind::ALL.iter().map(|&k| out.report(k).aggregate_mse.to_string()));
    write_csv(
        &out_path(config, "mse_table.csv")?,
        &["dataset", "learner", "window_days", "stationary", "periodic", "random", "reuse"],
        &[row],
    )?;

    let per_window: Vec<Vec<f64>> = StrategyKind::ALL
        .iter()
        .map(|&k| out.report(k).window_mses())
        .collect();
    let rows: Vec<Vec<String>> = out
        .report(StrategyKind::Periodic)
        .window_indices()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let mut row = vec![w.to_string(), stamp(windows[w].first_timestamp())];
            row.extend(per_window.iter().map(|m| m[i].to_string()));
            row
        })
        .collect();
    write_csv(
        &out_path(config, "mse_windows.csv")?,
        &["window", "start", "stationary", "periodic", "random", "reuse"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = out
        .comparisons
        .iter()
        .map(|c| {
            vec![
                c.a.clone(),
                c.b.clone(),
                c.mean_a.to_string(),
                c.mean_b.to_string(),
                c.u.to_string(),
                c.p_value.to_string(),
                c.exact.to_string(),
                if c.significant { "significant" } else { "insignificant" }.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out_path(config, "mann_whitney.csv")?,
        &["a", "b", "mean_mse_a", "mean_mse_b", "u", "p_value", "exact", "result"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = out
        .timings
        .costs
        .iter()
        .map(|c| {
            vec![
                c.strategy.label().to_string(),
                c.fits.to_string(),
                c.reduced_training.to_string(),
                c.segment_search_seconds.to_string(),
                c.training_seconds.to_string(),
                c.prediction_seconds.to_string(),
                c.forecasting_seconds.to_string(),
                c.similarity_seconds.to_string(),
                c.total_seconds.to_string(),
                c.cost.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out_path(config, "cost_table.csv")?,
        &[
            "strategy", "fits", "reduced_training", "segment_search_s", "training_s", "prediction_s",
            "forecasting_s", "similarity_s", "total_s", "cost",
        ],
        &rows,
    )?;
    write_csv(
        &out_path(config, "operation_ratio.csv")?,
        &["periodic_max_operation_s", "reuse_max_operation_s", "ratio"],
        &[vec![
            out.timings.periodic_max_operation_seconds.to_string(),
            out.timings.reuse_max_operation_seconds.to_string(),
            out.timings.ratio.to_string(),
        ]],
    )
}
