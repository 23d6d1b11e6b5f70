//! Model reuse on a stream whose two regimes alternate window by window:
//! after one fit, every later window is served by an earlier model.
//!
//! cargo run --example model_reuse_walkthrough

use reuse_core::forecasting::Forecaster;
use reuse_core::learners::LearnerSpec;
use reuse_core::similarity::{build_similarity_map, Metric, SimilarityConfig};
use reuse_core::strategies::{
    prune_registry, run_model_reuse, run_model_reuse_precomputed, run_periodic, ModelRegistry, Provenance,
};
use reuse_core::synthetic::{alternating_period, alternating_regimes};
use reuse_core::windowing::segment;

fn main() -> reuse_core::Result<()> {
    let ds = alternating_regimes(12, 16, 2);
    let windows = segment(&ds, 2)?;
    let spec = LearnerSpec::boosted();
    let config = SimilarityConfig::new(Forecaster::Es, Metric::Wd).with_seasonal_period(alternating_period(16, 2));

    let mut registry = ModelRegistry::default();
    let reuse = run_model_reuse(&windows, &spec, &config, &mut registry)?;
    let periodic = run_periodic(&windows, &spec)?;
    println!("window  decision                  reuse mse  periodic mse");
    for (r, p) in reuse.records.iter().zip(&periodic.records) {
        let decision = match r.provenance {
            Provenance::New { trained_on } => format!("fit on {trained_on}"),
            Provenance::ReusedFrom { source } => {
                format!("reuse slot {source} (fit on {})", registry.model_for(source)?.trained_on_window)
            }
            other => format!("{other:?}"),
        };
        println!("{:>6}  {decision:<25} {:>9.2e}  {:>12.2e}", r.window, r.mse, p.mse);
    }
    println!(
        "{} fits instead of {}, {} windows served by reuse, {} distinct models stored",
        reuse.fits,
        periodic.fits,
        reuse.reduced_training_count,
        registry.len()
    );

    // the same decisions from a map computed up front
    let map = build_similarity_map(&windows, &config)?;
    let literal = run_model_reuse_precomputed(&windows, &spec, &map, Forecaster::Es, &mut ModelRegistry::default())?;
    println!("precomputed map with {} entries: {} fits", map.len(), literal.fits);

    // a retention sweep three years after the last window drops everything
    let later = windows[windows.len() - 1].last_timestamp() + chrono::TimeDelta::days(3 * 366);
    println!("models pruned three years on: {}", prune_registry(&mut registry, later));
    Ok(())
}
