//! Small synthetic streams with known regime structure.

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::TimeSeriesDataset;

fn start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2020, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

fn timestamps(n: usize, samples_per_day: u32) -> Vec<NaiveDateTime> {
    let step = TimeDelta::seconds(86_400 / i64::from(samples_per_day));
    (0..n).map(|i| start() + step * i as i32).collect()
}

/// Windows alternate between two regimes, A on even and B on odd windows.
///
/// Within a window of `W` rows, row `i` of A has level `(i / W)^2` and row `i`
/// of B has level `1 - (i / W)^2`. The target is the level; the features are
/// the level and the position `i / W`. With `W` a power of two every value is
/// exact in binary, the two regimes together average exactly 0.5, and the
/// stream is exactly periodic with period `2 W`.
pub fn alternating_regimes(n_windows: usize, samples_per_day: u32, window_days: u32) -> TimeSeriesDataset {
    let w = samples_per_day as usize * window_days as usize;
    let n = n_windows * w;
    let mut features = Vec::with_capacity(2 * n);
    let mut target = Vec::with_capacity(n);
    for row in 0..n {
        let i = row % w;
        let u = i as f64 / w as f64;
        let level = if (row / w).is_multiple_of(2) { u * u } else { 1.0 - u * u };
        features.extend([level, u]);
        target.push(level);
    }
    TimeSeriesDataset::new(
        timestamps(n, samples_per_day),
        vec!["level".into(), "position".into()],
        features,
        "target",
        target,
        samples_per_day,
    )
    .expect("generated dataset is regular")
}

/// Seasonal period, in rows, matching [`alternating_regimes`].
pub fn alternating_period(samples_per_day: u32, window_days: u32) -> usize {
    2 * samples_per_day as usize * window_days as usize
}

/// Noisy stream cycling through `regimes` concepts, one concept per window.
///
/// Each concept has its own level and its own slope on the `load` feature,
/// so both the input distribution and the input-to-target mapping change at
/// window boundaries and recur every `regimes` windows.
pub fn recurring_regimes(
    n_windows: usize,
    samples_per_day: u32,
    window_days: u32,
    regimes: usize,
    noise: f64,
    seed: u64,
) -> TimeSeriesDataset {
    let regimes = regimes.max(1);
    let w = samples_per_day as usize * window_days as usize;
    let n = n_windows * w;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts: Vec<(f64, f64)> = (0..regimes)
        .map(|r| {
            let level = 2.0 * r as f64;
            let slope = if r % 2 == 0 { 1.5 } else { -1.0 };
            (level, slope)
        })
        .collect();
    let mut features = Vec::with_capacity(2 * n);
    let mut target = Vec::with_capacity(n);
    for row in 0..n {
        let (level, slope) = concepts[(row / w) % regimes];
        let hour = (row % samples_per_day as usize) as f64 / samples_per_day as f64;
        let daily = (std::f64::consts::TAU * hour).sin();
        let load = level + daily + rng.random_range(-0.5..0.5);
        let y = level + slope * (load - level) + 0.5 * daily + noise * rng.random_range(-1.0..1.0);
        features.extend([load, hour]);
        target.push(y);
    }
    TimeSeriesDataset::new(
        timestamps(n, samples_per_day),
        vec!["load".into(), "hour".into()],
        features,
        "demand",
        target,
        samples_per_day,
    )
    .expect("generated dataset is regular")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windowing::segment;

    #[test]
    fn alternating_regimes_repeat_exactly() {
        let ds = alternating_regimes(6, 16, 2);
        let w = segment(&ds, 2).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w[0].target(), w[4].target());
        assert_eq!(w[1].target(), w[3].target());
        assert_ne!(w[0].target(), w[1].target());
        let pair: f64 = w[0].target().iter().chain(w[1].target()).sum();
        assert_eq!(pair / 64.0, 0.5);
    }

    #[test]
    fn recurring_regimes_are_seeded() {
        let a = recurring_regimes(4, 8, 2, 2, 0.1, 5);
        assert_eq!(a, recurring_regimes(4, 8, 2, 2, 0.1, 5));
        assert_ne!(a, recurring_regimes(4, 8, 2, 2, 0.1, 6));
        assert_eq!(a.len(), 64);
    }
}
