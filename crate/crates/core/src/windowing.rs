//! Fixed-length, non-overlapping windows and the segment-length search.

use chrono::NaiveDateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::CostLedger;
use crate::forecasting::Forecaster;
use crate::ingest::TimeSeriesDataset;
use crate::learners::LearnerSpec;
use crate::strategies;

/// Candidate segment lengths, in days, tried by [`select_segment_length`].
pub const DEFAULT_CANDIDATE_DAYS: [u32; 7] = [5, 15, 31, 45, 60, 75, 90];

/// One month is taken as 31 days throughout.
pub const MONTH_DAYS: u32 = 31;

/// A contiguous slice of the dataset: window `k` starts at row `k * size`.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub index: usize,
    pub start_row: usize,
    pub length_days: u32,
    rows: usize,
    ds: &'a TimeSeriesDataset,
}

impl<'a> Window<'a> {
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn n_features(&self) -> usize {
        self.ds.n_features()
    }

    /// Row-major features of the window's rows.
    pub fn features(&self) -> &'a [f64] {
        let k = self.ds.n_features();
        &self.ds.features()[self.start_row * k..(self.start_row + self.rows) * k]
    }

    pub fn target(&self) -> &'a [f64] {
        &self.ds.target()[self.start_row..self.start_row + self.rows]
    }

    pub fn timestamps(&self) -> &'a [NaiveDateTime] {
        &self.ds.timestamps()[self.start_row..self.start_row + self.rows]
    }

    pub fn first_timestamp(&self) -> NaiveDateTime {
        self.timestamps()[0]
    }

    pub fn last_timestamp(&self) -> NaiveDateTime {
        self.timestamps()[self.rows - 1]
    }

    pub fn dataset(&self) -> &'a TimeSeriesDataset {
        self.ds
    }
}

/// Rows per window for a given length in days.
pub fn window_rows(ds: &TimeSeriesDataset, length_days: u32) -> usize {
    length_days as usize * ds.samples_per_day() as usize
}

/// Splits `ds` into `floor(N / size)` windows; trailing rows are dropped.
pub fn segment(ds: &TimeSeriesDataset, length_days: u32) -> Result<Vec<Window<'_>>> {
    let size = window_rows(ds, length_days);
    if size == 0 || size > ds.len() {
        return Err(Error::WindowTooLarge {
            window_rows: size,
            dataset_rows: ds.len(),
        });
    }
    Ok((0..ds.len() / size)
        .map(|index| Window {
            index,
            start_row: index * size,
            length_days,
            rows: size,
            ds,
        })
        .collect())
}

/// Window index for the test window starting at row offset `i`, as the
/// model-reuse loop computes it: `round(i / size) - 1` for exponential
/// smoothing and `round(i / size)` for the similarity assumption.
pub fn window_index_for_offset(i: usize, window_size: usize, approach: Forecaster) -> usize {
    let k = (i as f64 / window_size as f64).round() as usize;
    match approach {
        Forecaster::Es => k - 1,
        Forecaster::Sa => k,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub days: u32,
    pub windows: usize,
    /// Mean per-window MSE of periodic retraining; `None` when fewer than
    /// two windows fit.
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLengthReport {
    pub candidates: Vec<CandidateResult>,
    pub chosen: u32,
}

impl SegmentLengthReport {
    pub fn chosen_mse(&self) -> f64 {
        self.candidates
            .iter()
            .find(|c| c.days == self.chosen)
            .and_then(|c| c.mse)
            .expect("chosen candidate has an MSE")
    }
}

/// Runs periodic retraining for every candidate length and picks the one with
/// the lowest mean per-window MSE; ties go to the shorter length.
///
/// Candidates are evaluated in parallel. Their timings are appended to
/// `ledger` in candidate order.
pub fn select_segment_length(
    ds: &TimeSeriesDataset,
    candidates: &[u32],
    learner: &LearnerSpec,
    ledger: &mut CostLedger,
) -> Result<SegmentLengthReport> {
    let runs: Vec<(CandidateResult, Option<CostLedger>)> = candidates
        .par_iter()
        .map(|&days| {
            let size = window_rows(ds, days);
            let windows = ds.len().checked_div(size).unwrap_or(0);
            if windows < 2 {
                return Ok((
                    CandidateResult {
                        days,
                        windows,
                        mse: None,
                    },
                    None,
                ));
            }
            let wins = segment(ds, days)?;
            let report = strategies::run_periodic(&wins, learner)?;
            Ok((
                CandidateResult {
                    days,
                    windows,
                    mse: Some(report.aggregate_mse),
                },
                Some(report.timings.ledger),
            ))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(u32, f64)> = None;
    let mut results = Vec::with_capacity(runs.len());
    for (result, run_ledger) in runs {
        if let Some(l) = run_ledger {
            ledger.merge(&l);
        }
        if let Some(mse) = result.mse {
            let better = match best {
                None => true,
                Some((d, m)) => mse < m || (mse == m && result.days < d),
            };
            if better {
                best = Some((result.days, mse));
            }
        }
        results.push(result);
    }
    let (chosen, _) = best.ok_or(Error::NoViableCandidate)?;
    Ok(SegmentLengthReport {
        candidates: results,
        chosen,
    })
}
