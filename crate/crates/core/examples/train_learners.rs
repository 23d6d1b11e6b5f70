//! Fit bagged and boosted tree ensembles on one month of prices, score the
//! next month, cross-validate, and round-trip a model through JSON.
//!
//! cargo run --release --example train_learners

use reuse_core::evaluation::mse;
use reuse_core::ingest::{load_dataset, normalize_min_max, FitScope};
use reuse_core::learners::{cross_validate, fit_window, FoldMode, LearnerSpec, TrainedModel};
use reuse_core::windowing::segment;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn main() -> reuse_core::Result<()> {
    let (ds, _) = normalize_min_max(&load_dataset(NSW, "nswprice", 48)?, FitScope::Full)?;
    let windows = segment(&ds, 31)?;
    let (train, test) = (&windows[10], &windows[11]);

    for spec in [LearnerSpec::bagged().with_estimators(50), LearnerSpec::boosted()] {
        let model = fit_window(&spec, train)?;
        let err = mse(test.target(), &model.predict_window(test)?)?;
        let folds = cross_validate(&spec, train.features(), train.n_features(), train.target(), 5, FoldMode::Shuffled)?;
        let temporal = cross_validate(&spec, train.features(), train.n_features(), train.target(), 5, FoldMode::Temporal)?;
        println!(
            "{:<7} {} trees, fit in {:.3} s: next-month MSE {err:.6}, 5-fold CV {folds:.6} (temporal folds {temporal:.6})",
            spec.kind.label(),
            model.trees.len(),
            model.train_time_seconds
        );

        let restored = TrainedModel::from_json(&model.to_json()?)?;
        assert_eq!(restored.predict_window(test)?, model.predict_window(test)?);
    }
    Ok(())
}
