#![allow(dead_code)]

use reuse_core::ingest::{load_dataset, normalize_min_max, FitScope, TimeSeriesDataset};

pub const NSW_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

/// NSW electricity prices, min-max scaled over the whole file.
pub fn nsw() -> TimeSeriesDataset {
    let raw = load_dataset(NSW_PATH, "nswprice", 48).expect("bundled dataset loads");
    normalize_min_max(&raw, FitScope::Full).expect("non-empty").0
}

/// Removes every `timings` key, at any depth.
pub fn strip_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("timings");
            for child in map.values_mut() {
                strip_timings(child);
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

/// `W1` by integrating `|F_p - F_q|` between consecutive support points,
/// counting CDF values directly.
pub fn wasserstein_cdf_oracle(p: &[f64], q: &[f64]) -> f64 {
    let mut support: Vec<f64> = p.iter().chain(q).copied().collect();
    support.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    support
        .windows(2)
        .map(|w| (cdf(p, w[0]) - cdf(q, w[0])).abs() * (w[1] - w[0]))
        .sum()
}

/// Half the L1 distance between the two normalised histograms, with cells
/// located by scanning explicit edges.
pub fn tvd_histogram_oracle(p: &[f64], q: &[f64], bins: usize) -> f64 {
    let lo = p.iter().chain(q).copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().chain(q).copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let cell = |x: f64| {
        if width == 0.0 {
            return 0;
        }
        let mut k = 0;
        while k + 1 < bins && x >= lo + width * (k + 1) as f64 {
            k += 1;
        }
        k
    };
    let mass = |s: &[f64]| {
        let mut m = vec![0.0; bins];
        for &x in s {
            m[cell(x)] += 1.0 / s.len() as f64;
        }
        m
    };
    let (a, b) = (mass(p), mass(q));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

/// Two-sided p-value of U for sample sizes `n`, `m` by listing every
/// assignment of the pooled ranks.
pub fn mann_whitney_enumeration(n: usize, m: usize) -> Vec<f64> {
    let total = n + m;
    let mut counts = vec![0u64; n * m + 1];
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        // U counts pairs where an a-rank exceeds a b-rank
        let mut u = 0;
        let mut bs_below = 0;
        for r in 0..total {
            if mask & (1 << r) != 0 {
                u += bs_below;
            } else {
                bs_below += 1;
            }
        }
        counts[u] += 1;
    }
    let all: u64 = counts.iter().sum();
    (0..=n * m)
        .map(|u| {
            let lower: u64 = counts[..=u].iter().sum();
            let upper: u64 = counts[u..].iter().sum();
            (2.0 * lower.min(upper) as f64 / all as f64).min(1.0)
        })
        .collect()
}
