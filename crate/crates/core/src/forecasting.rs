//! Forecasting the target distribution of the next, still unseen window.
//!
//! Two forecasters are available:
//!
//! * [`Forecaster::Sa`] assumes the next window looks like the previous one
//!   and returns its target values verbatim.
//! * [`Forecaster::Es`] runs additive Holt-Winters exponential smoothing over
//!   the concatenated target values of every earlier window and forecasts a
//!   whole window ahead.
//!
//! Holt-Winters is written in error-correction form. With one-step error
//! `e_t = y_t - (L + T + S[t mod m])`:
//!
//! ```text
//! L <- L + T + alpha * e_t
//! T <- T + alpha * beta * e_t
//! S[t mod m] <- S[t mod m] + gamma * (1 - alpha) * e_t
//! y_hat(n + h) = L + h * T + S[(n + h - 1) mod m]
//! ```
//!
//! The level starts at the mean of the first season (or at `y_0` when the
//! seasonal part is off), the trend at zero and the seasonal indices at the
//! first season's deviations from that mean. `gamma = 0` switches the seasonal
//! part off entirely, so `beta = gamma = 0` is simple exponential smoothing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::windowing::Window;

/// Reported alongside every ES-based result.
pub const ES_VARIANT: &str = "holt_winters_additive";

const ALPHA_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const BETA_GAMMA_GRID: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Forecaster {
    /// Similarity assumption: next window = previous window.
    Sa,
    /// Exponential smoothing.
    Es,
}

impl Forecaster {
    pub fn label(self) -> &'static str {
        match self {
            Forecaster::Sa => "SA",
            Forecaster::Es => "ES",
        }
    }
}

impl std::str::FromStr for Forecaster {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sa" => Ok(Forecaster::Sa),
            "es" => Ok(Forecaster::Es),
            other => Err(Error::InvalidConfig(format!("unknown forecaster `{other}`"))),
        }
    }
}

/// Forecasted target values for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastDistribution {
    pub values: Vec<f64>,
    pub method: Forecaster,
    pub for_window: usize,
}

impl ForecastDistribution {
    /// Values clamped to [0, 1], the range of normalized targets.
    pub fn clamped(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub seasonal_period: usize,
}

impl EsParams {
    pub fn simple(alpha: f64) -> Self {
        Self {
            alpha,
            beta: 0.0,
            gamma: 0.0,
            seasonal_period: 1,
        }
    }

    fn seasonal_for(&self, n: usize) -> bool {
        self.gamma > 0.0 && self.seasonal_period >= 1 && self.seasonal_period <= n
    }
}

struct SmoothedState {
    level: f64,
    trend: f64,
    seasonal: Vec<f64>,
    sse: f64,
}

fn shifted_mean(values: &[f64]) -> f64 {
    let first = values[0];
    first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64
}

fn smooth(history: &[f64], params: &EsParams) -> SmoothedState {
    let n = history.len();
    let seasonal_on = params.seasonal_for(n);
    let m = params.seasonal_period.max(1);
    let (mut level, mut seasonal) = if seasonal_on {
        let l0 = shifted_mean(&history[..m]);
        (l0, history[..m].iter().map(|y| y - l0).collect::<Vec<_>>())
    } else {
        (history[0], Vec::new())
    };
    let mut trend = 0.0;
    let mut sse = 0.0;
    let (a, b, g) = (params.alpha, params.beta, params.gamma);
    for (t, &y) in history.iter().enumerate() {
        let s = if seasonal_on { seasonal[t % m] } else { 0.0 };
        let e = y - (level + trend + s);
        sse += e * e;
        level = level + trend + a * e;
        trend += a * b * e;
        if seasonal_on {
            seasonal[t % m] = s + g * (1.0 - a) * e;
        }
    }
    SmoothedState {
        level,
        trend,
        seasonal,
        sse,
    }
}

/// One-step-ahead in-sample sum of squared errors.
pub fn in_sample_sse(history: &[f64], params: &EsParams) -> f64 {
    smooth(history, params).sse
}

/// Grid search over `alpha`, `beta`, `gamma` minimizing one-step in-sample
/// squared error. Ties keep the lexicographically smallest triple.
pub fn fit_es(history: &[f64], seasonal_period: usize) -> Result<EsParams> {
    if history.len() < 2 {
        return Err(Error::HistoryTooShort {
            needed: 2,
            got: history.len(),
        });
    }
    let seasonal_ok = seasonal_period >= 1 && seasonal_period <= history.len();
    let grid: Vec<EsParams> = ALPHA_GRID
        .iter()
        .flat_map(|&alpha| {
            BETA_GAMMA_GRID.iter().flat_map(move |&beta| {
                BETA_GAMMA_GRID
                    .iter()
                    .filter(move |&&gamma| gamma == 0.0 || seasonal_ok)
                    .map(move |&gamma| EsParams {
                        alpha,
                        beta,
                        gamma,
                        seasonal_period,
                    })
            })
        })
        .collect();
    let scores: Vec<f64> = grid.par_iter().map(|p| in_sample_sse(history, p)).collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        // NaN never wins
        if s < scores[best] || (scores[best].is_nan() && !s.is_nan()) {
            best = i;
        }
    }
    Ok(grid[best])
}

/// Forecasts `horizon` values past the end of `history`.
pub fn forecast_es(
    history: &[f64],
    params: &EsParams,
    horizon: usize,
    for_window: usize,
) -> Result<ForecastDistribution> {
    if history.is_empty() {
        return Err(Error::HistoryTooShort { needed: 1, got: 0 });
    }
    if horizon == 0 {
        return Err(Error::InvalidConfig("forecast horizon must be at least 1".into()));
    }
    let n = history.len();
    let state = smooth(history, params);
    let m = params.seasonal_period.max(1);
    let values = (1..=horizon)
        .map(|h| {
            let s = if state.seasonal.is_empty() {
                0.0
            } else {
                state.seasonal[(n + h - 1) % m]
            };
            state.level + h as f64 * state.trend + s
        })
        .collect();
    Ok(ForecastDistribution {
        values,
        method: Forecaster::Es,
        for_window,
    })
}

/// Target values of window `t - 1`, the similarity-assumption forecast for `t`.
pub fn forecast_sa(windows: &[Window<'_>], t: usize) -> Result<ForecastDistribution> {
    if t == 0 {
        return Err(Error::NoPriorWindow(0));
    }
    let prev = windows.get(t - 1).ok_or(Error::NoPriorWindow(t))?;
    Ok(ForecastDistribution {
        values: prev.target().to_vec(),
        method: Forecaster::Sa,
        for_window: t,
    })
}

/// Forecast for window `t` using the chosen method. ES fits on the targets of
/// windows `0..t` and forecasts one window ahead.
pub fn forecast_window(
    windows: &[Window<'_>],
    t: usize,
    method: Forecaster,
    seasonal_period: usize,
) -> Result<ForecastDistribution> {
    match method {
        Forecaster::Sa => forecast_sa(windows, t),
        Forecaster::Es => {
            if t == 0 {
                return Err(Error::NoPriorWindow(0));
            }
            let history: Vec<f64> = windows[..t]
                .iter()
                .flat_map(|w| w.target().iter().copied())
                .collect();
            let horizon = windows[t.min(windows.len() - 1)].len();
            let params = fit_es(&history, seasonal_period)?;
            forecast_es(&history, &params, horizon, t)
        }
    }
}

/// For each window `t >= 1` of `history`: fit on windows `0..t`, forecast
/// window `t`, score with MSE.
pub fn es_backtest(history: &[f64], window_size: usize, seasonal_period: usize) -> Result<Vec<f64>> {
    if window_size == 0 || history.len() < 2 * window_size {
        return Err(Error::HistoryTooShort {
            needed: 2 * window_size.max(1),
            got: history.len(),
        });
    }
    let windows = history.len() / window_size;
    (1..windows)
        .map(|t| {
            let past = &history[..t * window_size];
            let actual = &history[t * window_size..(t + 1) * window_size];
            let params = fit_es(past, seasonal_period)?;
            let forecast = forecast_es(past, &params, window_size, t)?;
            crate::evaluation::mse(actual, &forecast.values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classic (non error-correction) Holt-Winters recursion, written out
    /// independently of `smooth`.
    fn classic_hw(y: &[f64], alpha: f64, beta: f64, gamma: f64, m: usize, horizon: usize) -> Vec<f64> {
        let l0: f64 = y[..m].iter().sum::<f64>() / m as f64;
        let mut season: Vec<f64> = y[..m].iter().map(|v| v - l0).collect();
        let (mut l, mut b) = (l0, 0.0);
        for (t, &obs) in y.iter().enumerate() {
            let s_old = season[t % m];
            let l_new = alpha * (obs - s_old) + (1.0 - alpha) * (l + b);
            let b_new = beta * (l_new - l) + (1.0 - beta) * b;
            season[t % m] = gamma * (obs - l_new) + (1.0 - gamma) * s_old;
            l = l_new;
            b = b_new;
        }
        (1..=horizon)
            .map(|h| l + h as f64 * b + season[(y.len() + h - 1) % m])
            .collect()
    }

    #[test]
    fn constant_history_picks_smallest_params() {
        let h = vec![0.37; 50];
        let p = fit_es(&h, 5).unwrap();
        assert_eq!((p.alpha, p.beta, p.gamma), (0.1, 0.0, 0.0));
        let f = forecast_es(&h, &p, 7, 1).unwrap();
        assert_eq!(f.values, vec![0.37; 7]);
    }

    #[test]
    fn periodic_history_selects_seasonal_model() {
        let h: Vec<f64> = (0..96).map(|i| ((i % 12) as f64 / 12.0 * std::f64::consts::TAU).sin()).collect();
        let p = fit_es(&h, 12).unwrap();
        assert!(p.gamma > 0.0);
        // brute force over the same grid: best gamma=0 error is strictly worse
        let best_nonseasonal = ALPHA_GRID
            .iter()
            .flat_map(|&a| BETA_GAMMA_GRID.iter().map(move |&b| (a, b)))
            .map(|(a, b)| in_sample_sse(&h, &EsParams { alpha: a, beta: b, gamma: 0.0, seasonal_period: 12 }))
            .fold(f64::INFINITY, f64::min);
        assert!(in_sample_sse(&h, &p) < best_nonseasonal);
    }

    #[test]
    fn too_short_history() {
        assert!(matches!(fit_es(&[1.0], 1), Err(Error::HistoryTooShort { .. })));
        assert!(matches!(
            forecast_es(&[], &EsParams::simple(0.5), 1, 0),
            Err(Error::HistoryTooShort { .. })
        ));
        assert!(matches!(es_backtest(&[1.0; 10], 10, 2), Err(Error::HistoryTooShort { .. })));
    }

    #[test]
    fn alpha_one_is_naive_forecast() {
        let h = [0.1, 0.5, 0.2, 0.9, 0.4];
        let f = forecast_es(&h, &EsParams::simple(1.0), 3, 0).unwrap();
        assert_eq!(f.values, vec![0.4, 0.4, 0.4]);
    }

    #[test]
    fn two_cycles_of_alternating_pattern() {
        let h = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let p = EsParams { alpha: 0.5, beta: 0.0, gamma: 0.5, seasonal_period: 2 };
        let f = forecast_es(&h, &p, 4, 0).unwrap();
        let oracle = classic_hw(&h, 0.5, 0.0, 0.5, 2, 4);
        for (a, b) in f.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(f.values, vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn matches_classic_recursion_on_noisy_series() {
        let h: Vec<f64> = (0..60)
            .map(|i| 0.5 + 0.01 * i as f64 + 0.2 * ((i % 6) as f64 - 2.5) + 0.05 * ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        for &(a, b, g) in &[(0.3, 0.1, 0.5), (0.9, 0.7, 0.1), (0.1, 0.0, 0.9)] {
            let p = EsParams { alpha: a, beta: b, gamma: g, seasonal_period: 6 };
            let ours = forecast_es(&h, &p, 9, 0).unwrap().values;
            let theirs = classic_hw(&h, a, b, g, 6, 9);
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn backtest_constant_and_repeating_series() {
        let mse = es_backtest(&[0.42; 40], 10, 5).unwrap();
        assert_eq!(mse, vec![0.0; 3]);

        let pattern = [0.1, 0.7, 0.3, 0.9, 0.5, 0.2];
        let h: Vec<f64> = pattern.iter().copied().cycle().take(6 * 2 * 5).collect();
        for m in es_backtest(&h, 12, 6).unwrap() {
            assert!(m < 1e-6, "{m}");
        }
    }

    #[test]
    fn forecast_length_equals_horizon_and_clamps() {
        let h: Vec<f64> = (0..30).map(|i| i as f64 / 10.0).collect();
        let p = fit_es(&h, 4).unwrap();
        for horizon in [1, 5, 17] {
            let f = forecast_es(&h, &p, horizon, 3).unwrap();
            assert_eq!(f.values.len(), horizon);
            assert!(f.clamped().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn seasonal_period_longer_than_history_disables_gamma() {
        let h = [0.2, 0.4, 0.6];
        let p = fit_es(&h, 10).unwrap();
        assert_eq!(p.gamma, 0.0);
    }
}
