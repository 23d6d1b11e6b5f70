//! Reusing trained regressors across recurring time-series regimes.
//!
//! A dataset is cut into equal windows. Instead of retraining on every new
//! window, the target distribution of the upcoming window is forecast and
//! compared with earlier windows; if one is close enough, the model already
//! trained for it is served again.
//!
//! ```no_run
//! use reuse_core::prelude::*;
//!
//! let ds = load_dataset("data/nsw_electricity.csv", "nswprice", 48)?;
//! let (ds, _) = normalize_min_max(&ds, FitScope::Full)?;
//! let windows = segment(&ds, 31)?;
//! let spec = LearnerSpec::boosted();
//! let config = SimilarityConfig::new(Forecaster::Es, Metric::Wd);
//! let report = run_model_reuse(&windows, &spec, &config, &mut ModelRegistry::default())?;
//! println!("{} fits, {} reused", report.fits, report.reduced_training_count);
//! # Ok::<(), reuse_core::Error>(())
//! ```

pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod forecasting;
pub mod ingest;
pub mod learners;
pub mod similarity;
pub mod strategies;
pub mod synthetic;
pub mod windowing;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{compare_strategies, financial_cost, mann_whitney_u, mse, CostLedger, Operation};
    pub use crate::forecasting::{forecast_window, Forecaster};
    pub use crate::ingest::{load_dataset, normalize_min_max, FitScope, TimeSeriesDataset};
    pub use crate::learners::{LearnerKind, LearnerSpec};
    pub use crate::similarity::{build_similarity_map, Metric, SimilarityConfig, SimilarityThreshold};
    pub use crate::strategies::{
        run_model_reuse, run_periodic, run_random, run_stationary, ModelRegistry, StrategyKind, StrategyReport,
    };
    pub use crate::windowing::{segment, select_segment_length};
}
