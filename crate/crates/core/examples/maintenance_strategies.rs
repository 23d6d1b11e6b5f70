//! The three baseline maintenance strategies side by side: train once,
//! retrain every window, and guess at random.
//!
//! cargo run --release --example maintenance_strategies

use reuse_core::ingest::{load_dataset, normalize_min_max, FitScope};
use reuse_core::learners::LearnerSpec;
use reuse_core::strategies::{run_periodic, run_random, run_stationary, StrategyReport};
use reuse_core::windowing::segment;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn show(r: &StrategyReport) {
    println!(
        "{:<22} mse {:.6}  fits {:>2}  train {:.2} s",
        r.label(),
        r.aggregate_mse,
        r.fits,
        r.train_seconds()
    );
}

fn main() -> reuse_core::Result<()> {
    let (ds, _) = normalize_min_max(&load_dataset(NSW, "nswprice", 48)?, FitScope::Full)?;
    let windows = segment(&ds, 31)?;
    let spec = LearnerSpec::boosted();
    let stationary = run_stationary(&windows, &spec)?;
    let periodic = run_periodic(&windows, &spec)?;
    let random = run_random(&windows, 0)?;
    for r in [&stationary, &periodic, &random] {
        show(r);
    }

    println!("\nwindow  stationary  periodic");
    for (s, p) in stationary.records.iter().zip(&periodic.records).step_by(4) {
        println!("{:>6}  {:>10.6}  {:>8.6}", s.window, s.mse, p.mse);
    }
    Ok(())
}
