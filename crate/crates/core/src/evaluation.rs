//! Scoring, the Mann-Whitney U test and maintenance-cost accounting.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::strategies::StrategyReport;

/// On-demand price of the reference instance, per hour.
pub const DEFAULT_HOURLY_RATE: f64 = 0.115;

/// Significance level for every comparison.
pub const ALPHA: f64 = 0.05;

/// Largest `n + m` for which p-values are computed exactly.
pub const EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Training,
    Prediction,
    Forecasting,
    Similarity,
}

impl Operation {
    pub const ALL: [Operation; 4] = [
        Operation::Training,
        Operation::Prediction,
        Operation::Forecasting,
        Operation::Similarity,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Operation::Training => "training",
            Operation::Prediction => "prediction",
            Operation::Forecasting => "forecasting",
            Operation::Similarity => "similarity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub operation: Operation,
    pub seconds: f64,
}

/// Wall-clock seconds spent per operation, priced at an hourly rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    entries: Vec<LedgerEntry>,
    hourly_rate: f64,
}

impl Default for CostLedger {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            hourly_rate: DEFAULT_HOURLY_RATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryTotal {
    pub operation: Operation,
    pub count: usize,
    pub seconds: f64,
    pub cost: f64,
}

impl CostLedger {
    pub fn with_rate(hourly_rate: f64) -> Result<Self> {
        if !(hourly_rate.is_finite() && hourly_rate >= 0.0) {
            return Err(Error::InvalidConfig(format!("hourly rate {hourly_rate}")));
        }
        Ok(Self {
            entries: Vec::new(),
            hourly_rate,
        })
    }

    pub fn hourly_rate(&self) -> f64 {
        self.hourly_rate
    }

    /// # Panics
    /// On a negative or non-finite duration.
    pub fn record(&mut self, operation: Operation, seconds: f64) {
        assert!(seconds.is_finite() && seconds >= 0.0, "bad duration {seconds}");
        self.entries.push(LedgerEntry { operation, seconds });
    }

    /// Appends `other`'s entries; the rate of `self` is kept.
    pub fn merge(&mut self, other: &CostLedger) {
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn count(&self, operation: Operation) -> usize {
        self.entries.iter().filter(|e| e.operation == operation).count()
    }

    pub fn seconds(&self, operation: Operation) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.operation == operation)
            .fold(0.0, |acc, e| acc + e.seconds)
    }

    /// Longest single entry of the given kind, 0 if none.
    pub fn max_seconds(&self, operation: Operation) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.operation == operation)
            .map(|e| e.seconds)
            .fold(0.0, f64::max)
    }

    pub fn total_seconds(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc + e.seconds)
    }

    pub fn totals(&self) -> Vec<CategoryTotal> {
        Operation::ALL
            .iter()
            .map(|&operation| {
                let seconds = self.seconds(operation);
                CategoryTotal {
                    operation,
                    count: self.count(operation),
                    seconds,
                    cost: self.hourly_rate * (seconds / 60.0) / 60.0,
                }
            })
            .collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.hourly_rate * (self.total_seconds() / 60.0) / 60.0
    }
}

/// `hourly_rate * minutes / 60`.
pub fn financial_cost(seconds: f64, hourly_rate: f64) -> Result<f64> {
    if seconds < 0.0 {
        return Err(Error::NegativeDuration(seconds));
    }
    Ok(hourly_rate * (seconds / 60.0) / 60.0)
}

/// Mean squared error.
pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(Error::Empty);
    }
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok(sum / actual.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Number of pairs `(a_i, b_j)` with `a_i > b_j`, ties counting one half.
    pub u: f64,
    /// Two-sided.
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks (1-based) of `values`, plus the tie groups' sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Number of arrangements of `n` a-items and `m` b-items for each value of U.
fn u_counts(n: usize, m: usize) -> Vec<u64> {
    // table[i][j][u]; grown one dimension at a time
    let max_u = n * m;
    let mut prev: Vec<Vec<u64>> = (0..=m)
        .map(|_| {
            let mut v = vec![0u64; max_u + 1];
            v[0] = 1;
            v
        })
        .collect();
    for _ in 0..n {
        let mut cur: Vec<Vec<u64>> = Vec::with_capacity(m + 1);
        let mut row0 = vec![0u64; max_u + 1];
        row0[0] = 1;
        cur.push(row0);
        for j in 1..=m {
            // largest item is an a (adds j to U) or a b
            let mut v = cur[j - 1].clone();
            for u in j..=max_u {
                v[u] += prev[j][u - j];
            }
            cur.push(v);
        }
        prev = cur;
    }
    prev.swap_remove(m)
}

/// Two-sided Mann-Whitney U test of `a` against `b`.
///
/// Exact when `|a| + |b| <= 16` and nothing is tied, otherwise the normal
/// approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (n, m) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..n].iter().sum();
    let u = rank_sum - (n * (n + 1)) as f64 / 2.0;

    if n + m <= EXACT_LIMIT && ties.is_empty() {
        let counts = u_counts(n, m);
        let total: u64 = counts.iter().sum();
        let k = u as usize;
        let lower: u64 = counts[..=k].iter().sum();
        let upper: u64 = counts[k..].iter().sum();
        let p = 2.0 * lower.min(upper) as f64 / total as f64;
        return Ok(MannWhitney {
            u,
            p_value: p.min(1.0),
            exact: true,
        });
    }

    let big_n = (n + m) as f64;
    let nm = (n * m) as f64;
    let mu = nm / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (big_n * (big_n - 1.0));
    let var = nm / 12.0 * ((big_n + 1.0) - tie_term);
    if var <= 0.0 {
        return Ok(MannWhitney {
            u,
            p_value: 1.0,
            exact: false,
        });
    }
    let z = ((u - mu).abs() - 0.5) / var.sqrt();
    let normal = Normal::standard();
    let p = 2.0 * normal.sf(z);
    Ok(MannWhitney {
        u,
        p_value: p.clamp(0.0, 1.0),
        exact: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub a: String,
    pub b: String,
    pub u: f64,
    pub p_value: f64,
    pub exact: bool,
    pub significant: bool,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Tests two labelled MSE lists against each other.
pub fn compare_samples(a_label: &str, a: &[f64], b_label: &str, b: &[f64]) -> Result<ComparisonResult> {
    let test = mann_whitney_u(a, b)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(ComparisonResult {
        a: a_label.to_string(),
        b: b_label.to_string(),
        u: test.u,
        p_value: test.p_value,
        exact: test.exact,
        significant: test.p_value < ALPHA,
        mean_a: mean(a),
        mean_b: mean(b),
    })
}

/// Pairwise tests of the per-window MSE lists of every pair of reports, in
/// input order.
pub fn compare_strategies(reports: &[StrategyReport]) -> Result<Vec<ComparisonResult>> {
    if reports.len() < 2 {
        return Err(Error::MisalignedReports(format!(
            "need at least two reports, got {}",
            reports.len()
        )));
    }
    let windows = reports[0].window_indices();
    for r in &reports[1..] {
        if r.window_indices() != windows {
            return Err(Error::MisalignedReports(format!(
                "{} and {} score different windows",
                reports[0].label(),
                r.label()
            )));
        }
    }
    let mut out = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            out.push(compare_samples(
                &reports[i].label(),
                &reports[i].window_mses(),
                &reports[j].label(),
                &reports[j].window_mses(),
            )?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mse(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
        assert!(matches!(mse(&[], &[]), Err(Error::Empty)));
    }

    #[test]
    fn cost_examples() {
        assert_eq!(financial_cost(3600.0, 0.115).unwrap(), 0.115);
        assert_eq!(financial_cost(0.0, 0.115).unwrap(), 0.0);
        assert_eq!(financial_cost(1800.0, 0.115).unwrap(), 0.0575);
        assert!(matches!(financial_cost(-1.0, 0.115), Err(Error::NegativeDuration(_))));
    }

    #[test]
    fn ledger_totals() {
        let mut l = CostLedger::default();
        l.record(Operation::Training, 2.0);
        l.record(Operation::Training, 1.5);
        l.record(Operation::Similarity, 0.25);
        assert_eq!(l.seconds(Operation::Training), 3.5);
        assert_eq!(l.count(Operation::Training), 2);
        assert_eq!(l.max_seconds(Operation::Training), 2.0);
        assert_eq!(l.total_seconds(), 3.75);
        let mut other = CostLedger::default();
        other.record(Operation::Prediction, 1.0);
        l.merge(&other);
        assert_eq!(l.entries().len(), 4);
        assert!(CostLedger::with_rate(-1.0).is_err());
    }

    #[test]
    fn u_distribution_sizes() {
        let c = u_counts(2, 2);
        assert_eq!(c, vec![1, 1, 2, 1, 1]);
        assert_eq!(u_counts(8, 8).iter().sum::<u64>(), 12870);
        assert_eq!(u_counts(3, 0), vec![1]);
    }

    #[test]
    fn mann_whitney_examples() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.exact);
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-15);

        let a: Vec<f64> = (1..=8).map(f64::from).collect();
        let b: Vec<f64> = (101..=108).map(f64::from).collect();
        assert!(mann_whitney_u(&a, &b).unwrap().p_value < 0.05);

        let same = [0.3, 0.1, 0.7, 0.2];
        assert!(mann_whitney_u(&same, &same).unwrap().p_value >= 0.99);
        assert!(matches!(mann_whitney_u(&[], &[1.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn normal_approximation_with_ties() {
        // reference value from an independent statistics package
        let a = [1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let b = [2.0, 3.0, 3.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(!r.exact);
        assert_eq!(r.u, 21.0);
        assert!((r.p_value - 0.054162446204138834).abs() < 1e-10, "{}", r.p_value);
        let swapped = mann_whitney_u(&b, &a).unwrap();
        assert_eq!(swapped.u, 90.0 - 21.0);
        assert!((swapped.p_value - r.p_value).abs() < 1e-15);
    }
}
