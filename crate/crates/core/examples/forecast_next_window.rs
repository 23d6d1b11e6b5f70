//! Forecast the target distribution of the next window with both
//! forecasters, and back-test the Holt-Winters forecaster.
//!
//! cargo run --example forecast_next_window

use reuse_core::forecasting::{es_backtest, fit_es, forecast_window, Forecaster};
use reuse_core::ingest::{load_dataset, normalize_min_max, FitScope};
use reuse_core::windowing::segment;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn summary(values: &[f64]) -> String {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
    format!("min {:.3}  median {:.3}  max {:.3}", at(0.0), at(0.5), at(1.0))
}

fn main() -> reuse_core::Result<()> {
    let (ds, _) = normalize_min_max(&load_dataset(NSW, "nswprice", 48)?, FitScope::Full)?;
    // a week per window keeps the grid search quick
    let windows = segment(&ds, 7)?;
    let t = 6;
    let history: Vec<f64> = windows[..t].iter().flat_map(|w| w.target().iter().copied()).collect();
    let params = fit_es(&history, 48)?;
    println!(
        "Holt-Winters on {} rows: alpha {} beta {} gamma {}",
        history.len(),
        params.alpha,
        params.beta,
        params.gamma
    );

    println!("window {t} actual      {}", summary(windows[t].target()));
    for method in [Forecaster::Es, Forecaster::Sa] {
        let f = forecast_window(&windows, t, method, 48)?;
        println!("window {t} {:<11} {}", format!("{} forecast", method.label()), summary(&f.clamped()));
    }

    let backtest = es_backtest(&history, windows[0].len(), 48)?;
    for (k, m) in backtest.iter().enumerate() {
        println!("back-test window {}: MSE {m:.5}", k + 1);
    }
    Ok(())
}
