use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of equal-width cells used to discretize samples for TVD.
pub const DEFAULT_TVD_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// 1-D Wasserstein (earth mover's) distance.
    Wd,
    /// Total variation distance over a shared histogram.
    Tvd,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Wd => "WD",
            Metric::Tvd => "TVD",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wd" | "wasserstein" => Ok(Metric::Wd),
            "tvd" | "total_variation" => Ok(Metric::Tvd),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

/// A non-empty bag of finite values, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }
}

/// `W1(p, q) = integral over u in (0, 1] of |Q_p(u) - Q_q(u)|`, with `Q` the
/// empirical quantile functions. Equal sizes reduce to the mean absolute
/// difference of the sorted samples.
pub fn wasserstein_distance(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let (a, b) = (p.sorted(), q.sorted());
    let (n, m) = (a.len(), b.len());
    if n == m {
        return a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
    }
    // walk the merged quantile breakpoints i/n and j/m
    let (mut i, mut j) = (0usize, 0usize);
    let mut u_prev = 0.0;
    let mut total = 0.0;
    while i < n && j < m {
        let (ni, nj) = ((i + 1) * m, (j + 1) * n);
        let u_next = if ni <= nj {
            (i + 1) as f64 / n as f64
        } else {
            (j + 1) as f64 / m as f64
        };
        total += (a[i] - b[j]).abs() * (u_next - u_prev);
        u_prev = u_next;
        match ni.cmp(&nj) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    total
}

fn histogram_counts(p: &EmpiricalDistribution, q: &EmpiricalDistribution, bins: usize) -> (Vec<u64>, Vec<u64>) {
    let lo = p.min().min(q.min());
    let hi = p.max().max(q.max());
    let width = (hi - lo) / bins as f64;
    let counts = |d: &EmpiricalDistribution| {
        let mut counts = vec![0u64; bins];
        for &x in d.sorted() {
            let k = if width > 0.0 {
                (((x - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        counts
    };
    (counts(p), counts(q))
}

/// Shared histogram of both samples: `bins` equal-width cells over the range
/// of their union, the last cell closed on the right.
pub fn shared_histogram(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    bins: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (cp, cq) = histogram_counts(p, q, bins);
    let mass = |c: Vec<u64>, n: usize| c.into_iter().map(|k| k as f64 / n as f64).collect();
    (mass(cp, p.len()), mass(cq, q.len()))
}

/// `0.5 * sum |P(x) - Q(x)|` over the cells of [`shared_histogram`].
///
/// Evaluated on integer counts scaled to a common denominator, so the result
/// is exact up to one final rounding and never leaves [0, 1].
pub fn total_variation_distance(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    bins: usize,
) -> f64 {
    let bins = bins.max(1);
    let (cp, cq) = histogram_counts(p, q, bins);
    let (n, m) = (p.len() as u64, q.len() as u64);
    let diff: u64 = cp.iter().zip(&cq).map(|(a, b)| (a * m).abs_diff(b * n)).sum();
    diff as f64 / (2 * n * m) as f64
}

pub fn distance(
    metric: Metric,
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    tvd_bins: usize,
) -> f64 {
    match metric {
        Metric::Wd => wasserstein_distance(p, q),
        Metric::Tvd => total_variation_distance(p, q, tvd_bins),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v).unwrap()
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_distance(&dist(&[1.0, 2.0, 3.0]), &dist(&[2.0, 3.0, 4.0])), 1.0);
        assert_eq!(wasserstein_distance(&dist(&[0.3, 0.1]), &dist(&[0.1, 0.3])), 0.0);
        assert_eq!(wasserstein_distance(&dist(&[0.0, 0.0]), &dist(&[0.0, 1.0])), 0.5);
    }

    #[test]
    fn wasserstein_unequal_sizes() {
        // {0} vs {0, 1}: CDFs differ by 1/2 on [0, 1)
        assert!((wasserstein_distance(&dist(&[0.0]), &dist(&[0.0, 1.0])) - 0.5).abs() < 1e-15);
        // {0, 1, 2} vs {0, 2}: |F| differs by 1/6 on [0,1) and [1,2)
        let d = wasserstein_distance(&dist(&[0.0, 1.0, 2.0]), &dist(&[0.0, 2.0]));
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tvd_examples() {
        // P = (0.5, 0.5), Q = (0.25, 0.75) over two cells of [0, 1]
        let p = dist(&[0.0, 1.0]);
        let q = dist(&[0.0, 0.9, 0.8, 1.0]);
        assert!((total_variation_distance(&p, &q, 2) - 0.25).abs() < 1e-15);
        assert_eq!(total_variation_distance(&dist(&[0.0, 0.1]), &dist(&[0.9, 1.0]), 20), 1.0);
        assert_eq!(total_variation_distance(&p, &p, 20), 0.0);
        assert_eq!(total_variation_distance(&dist(&[3.0]), &dist(&[3.0, 3.0]), 20), 0.0);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(EmpiricalDistribution::new(&[]), Err(Error::EmptyDistribution)));
        assert!(matches!(EmpiricalDistribution::new(&[f64::NAN]), Err(Error::NonFiniteValue)));
    }
}
