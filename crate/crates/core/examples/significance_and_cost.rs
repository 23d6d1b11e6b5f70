//! Is reuse as accurate as periodic retraining, and what does each cost?
//!
//! cargo run --release --example significance_and_cost

use reuse_core::evaluation::{compare_strategies, financial_cost, mann_whitney_u, Operation, DEFAULT_HOURLY_RATE};
use reuse_core::forecasting::Forecaster;
use reuse_core::ingest::{load_dataset, normalize_min_max, FitScope};
use reuse_core::learners::LearnerSpec;
use reuse_core::similarity::{Metric, SimilarityConfig};
use reuse_core::strategies::{run_model_reuse, run_periodic, run_random, ModelRegistry};
use reuse_core::windowing::segment;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn main() -> reuse_core::Result<()> {
    let small = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0])?;
    println!("[1, 2] vs [3, 4]: U = {}, exact p = {:.4}", small.u, small.p_value);
    println!("one hour of compute: ${}", financial_cost(3600.0, DEFAULT_HOURLY_RATE)?);

    let (ds, _) = normalize_min_max(&load_dataset(NSW, "nswprice", 48)?, FitScope::Full)?;
    let windows = segment(&ds, 31)?;
    let spec = LearnerSpec::boosted();
    let reports = [
        run_periodic(&windows, &spec)?,
        run_model_reuse(&windows, &spec, &SimilarityConfig::new(Forecaster::Sa, Metric::Tvd), &mut ModelRegistry::default())?,
        run_random(&windows, 0)?,
    ];
    println!();
    for c in compare_strategies(&reports)? {
        println!(
            "{:<24} vs {:<24} p = {:.4}  {}",
            c.a,
            c.b,
            c.p_value,
            if c.significant { "significant" } else { "no significant difference" }
        );
    }
    println!();
    for r in &reports {
        let ledger = &r.timings.ledger;
        let line: Vec<String> = Operation::ALL
            .iter()
            .map(|op| format!("{} {:.2} s", op.label(), ledger.seconds(*op)))
            .collect();
        println!("{:<24} {}  total ${:.7}", r.label(), line.join(", "), ledger.total_cost());
    }
    Ok(())
}
