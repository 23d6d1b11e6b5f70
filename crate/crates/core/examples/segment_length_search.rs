//! Choose the window length by running periodic retraining for each
//! candidate length and keeping the most accurate.
//!
//! cargo run --release --example segment_length_search

use reuse_core::evaluation::{CostLedger, Operation};
use reuse_core::ingest::{load_dataset, normalize_min_max, FitScope};
use reuse_core::learners::LearnerSpec;
use reuse_core::windowing::select_segment_length;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn main() -> reuse_core::Result<()> {
    let (ds, _) = normalize_min_max(&load_dataset(NSW, "nswprice", 48)?, FitScope::Full)?;
    let spec = LearnerSpec::boosted().with_estimators(50);
    let mut ledger = CostLedger::default();
    let report = select_segment_length(&ds, &[5, 15, 31, 45, 60, 75, 90], &spec, &mut ledger)?;
    for c in &report.candidates {
        println!("{:>3} days  {:>3} windows  mse {:.6}", c.days, c.windows, c.mse.unwrap_or(f64::NAN));
    }
    println!("chosen: {} days", report.chosen);
    println!(
        "search cost: {} fits, {:.2} s of training, ${:.6}",
        ledger.count(Operation::Training),
        ledger.seconds(Operation::Training),
        ledger.total_cost()
    );
    Ok(())
}
