//! Distribution distances between windows and the reuse decision built on them.

mod distance;
mod map;

pub use distance::{
    distance, shared_histogram, total_variation_distance, wasserstein_distance, EmpiricalDistribution,
    Metric, DEFAULT_TVD_BINS,
};
pub use map::{
    build_similarity_map, build_similarity_map_timed, most_similar_prior, quantile_sorted, resolve_root,
    Decision, SimilarityConfig, SimilarityEntry, SimilarityMap, SimilarityThreshold, SimilarityTracker,
};
