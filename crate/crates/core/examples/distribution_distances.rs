//! Wasserstein and total variation distances between windows, and the
//! similarity map they induce on a stream with recurring regimes.
//!
//! cargo run --example distribution_distances

use reuse_core::forecasting::Forecaster;
use reuse_core::ingest::{normalize_min_max, FitScope};
use reuse_core::similarity::{
    build_similarity_map, resolve_root, total_variation_distance, wasserstein_distance, EmpiricalDistribution,
    Metric, SimilarityConfig, SimilarityThreshold,
};
use reuse_core::synthetic::recurring_regimes;
use reuse_core::windowing::segment;

fn main() -> reuse_core::Result<()> {
    let p = EmpiricalDistribution::new(&[1.0, 2.0, 3.0])?;
    let q = EmpiricalDistribution::new(&[2.0, 3.0, 4.0])?;
    println!("W1 {{1,2,3}} vs {{2,3,4}} = {}", wasserstein_distance(&p, &q));
    println!("TVD over 20 bins = {}", total_variation_distance(&p, &q, 20));

    // three concepts repeating every three windows
    let ds = recurring_regimes(9, 24, 2, 3, 0.1, 7);
    let (ds, _) = normalize_min_max(&ds, FitScope::Full)?;
    let windows = segment(&ds, 2)?;
    let dists: Vec<_> = windows.iter().map(|w| EmpiricalDistribution::new(w.target())).collect::<Result<_, _>>()?;
    println!("\npairwise W1 between windows:");
    for (i, a) in dists.iter().enumerate() {
        let row: Vec<String> = dists.iter().map(|b| format!("{:.3}", wasserstein_distance(a, b))).collect();
        println!("  {i}: {}", row.join(" "));
    }

    for metric in [Metric::Wd, Metric::Tvd] {
        for threshold in [SimilarityThreshold::default(), SimilarityThreshold::Absolute(0.05)] {
            let config = SimilarityConfig::new(Forecaster::Sa, metric).with_threshold(threshold);
            let map = build_similarity_map(&windows, &config)?;
            let entries: Vec<String> = map
                .iter()
                .map(|(t, e)| format!("{t}->{} (root {}, d {:.3})", e.source, resolve_root(&map, t), e.distance))
                .collect();
            println!("\n{} / {}: {}", metric.label(), threshold.label(), if entries.is_empty() { "no entries".into() } else { entries.join(", ") });
        }
    }
    Ok(())
}
