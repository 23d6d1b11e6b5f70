//! CART regression trees stored as flat arrays.

use serde::{Deserialize, Serialize};

/// Marks a leaf in [`Tree::feature`].
pub const LEAF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

/// Node `k` splits on `feature[k]` at `threshold[k]` (left if `x <= threshold`)
/// or, if `feature[k] == LEAF`, predicts `value[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<u32>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub value: Vec<f64>,
}

/// Mean written as `first + mean(v - first)` so a constant input returns
/// that constant exactly.
pub(crate) fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return 0.0;
    };
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + (v - first), n + 1));
    first + sum / n as f64
}

struct Builder<'a> {
    x: &'a [f64],
    y: &'a [f64],
    k: usize,
    params: TreeParams,
    tree: Tree,
    // scratch buffer for (feature value, target) pairs
    pairs: Vec<(f64, f64)>,
}

impl Builder<'_> {
    fn push_leaf(&mut self, rows: &[usize]) -> u32 {
        let value = stable_mean(rows.iter().map(|&r| self.y[r]));
        self.push(LEAF, 0.0, value)
    }

    fn push(&mut self, feature: u32, threshold: f64, value: f64) -> u32 {
        let id = self.tree.feature.len() as u32;
        self.tree.feature.push(feature);
        self.tree.threshold.push(threshold);
        self.tree.left.push(0);
        self.tree.right.push(0);
        self.tree.value.push(value);
        id
    }

    /// Best `(feature, threshold, gain)` by reduction of the squared error.
    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let n = rows.len();
        let leaf = self.params.min_samples_leaf.max(1);
        if n < 2 * leaf {
            return None;
        }
        let centre = self.y[rows[0]];
        let total: f64 = rows.iter().map(|&r| self.y[r] - centre).sum();
        let mut best: Option<(usize, f64, f64)> = None;
        for f in 0..self.k {
            self.pairs.clear();
            self.pairs
                .extend(rows.iter().map(|&r| (self.x[r * self.k + f], self.y[r] - centre)));
            self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += self.pairs[i].1;
                let nl = i + 1;
                if nl < leaf || n - nl < leaf {
                    continue;
                }
                let (xl, xr) = (self.pairs[i].0, self.pairs[i + 1].0);
                if xl == xr {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64
                    - total * total / n as f64;
                if gain > 0.0 && best.is_none_or(|(_, _, g)| gain > g) {
                    let mut threshold = xl + (xr - xl) / 2.0;
                    if threshold >= xr {
                        threshold = xl;
                    }
                    best = Some((f, threshold, gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn build(&mut self, rows: &mut [usize], depth: usize) -> u32 {
        let first = self.y[rows[0]];
        let constant = rows.iter().all(|&r| self.y[r] == first);
        if depth >= self.params.max_depth || constant {
            return self.push_leaf(rows);
        }
        let Some((f, threshold)) = self.best_split(rows) else {
            return self.push_leaf(rows);
        };
        let mut split = 0;
        for i in 0..rows.len() {
            if self.x[rows[i] * self.k + f] <= threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let id = self.push(f as u32, threshold, 0.0);
        let (l, r) = rows.split_at_mut(split);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.tree.left[id as usize] = left;
        self.tree.right[id as usize] = right;
        id
    }
}

impl Tree {
    /// Fits a tree to the rows `rows` of `x` (row-major, `k` columns).
    pub fn fit(x: &[f64], y: &[f64], k: usize, rows: &mut [usize], params: TreeParams) -> Tree {
        let mut b = Builder {
            x,
            y,
            k,
            params,
            tree: Tree {
                feature: Vec::new(),
                threshold: Vec::new(),
                left: Vec::new(),
                right: Vec::new(),
                value: Vec::new(),
            },
            pairs: Vec::with_capacity(rows.len()),
        };
        b.build(rows, 0);
        b.tree
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            let f = self.feature[node];
            if f == LEAF {
                return self.value[node];
            }
            node = if row[f as usize] <= self.threshold[node] {
                self.left[node]
            } else {
                self.right[node]
            } as usize;
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, node: usize) -> usize {
            if t.feature[node] == LEAF {
                0
            } else {
                1 + walk(t, t.left[node] as usize).max(walk(t, t.right[node] as usize))
            }
        }
        walk(self, 0)
    }
}
