//! Greedy binary decision tree with Gini impurity splits, no pruning.

use crate::dataset::Dataset;

use super::weighted_majority;

/// Minimum total impurity decrease (in count units) for a split to be kept.
const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Node {
    Leaf { label: u32 },
    /// Records with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Fitted Gini decision tree.
///
/// Splits greedily maximize the decrease of the size-weighted Gini impurity,
/// scanning features in order and thresholds at midpoints between distinct
/// consecutive values; ties keep the first candidate, so the fit is fully
/// deterministic. A node becomes a leaf when it is pure, the depth cap is
/// reached, either child would fall below the minimum leaf size, or no split
/// decreases the impurity.
#[derive(Clone, Debug)]
pub struct TreeModel {
    pub(crate) dim: usize,
    nodes: Vec<Node>,
}

/// Per-class counts of `indices`, aligned with the sorted `classes` list.
fn class_counts(classes: &[u32], labels: &[u32], indices: &[usize]) -> Vec<f64> {
    let mut counts = vec![0.0; classes.len()];
    for &i in indices {
        let slot = classes.binary_search(&labels[i]).expect("label seen at fit time");
        counts[slot] += 1.0;
    }
    counts
}

/// `sum(c^2)/n`, the negated(-ish) Gini term: maximizing the sum of this
/// quantity over the two children minimizes the weighted child impurity.
fn purity_score(counts: &[f64], n: f64) -> f64 {
    counts.iter().map(|c| c * c).sum::<f64>() / n
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    classes: Vec<u32>,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, counts: &[f64]) -> usize {
        let label = weighted_majority(
            self.classes.iter().zip(counts).map(|(&c, &w)| (c, w)),
        )
        .expect("node is nonempty");
        self.nodes.push(Node::Leaf { label });
        self.nodes.len() - 1
    }

    fn build(&mut self, indices: &[usize], depth: usize) -> usize {
        let n = indices.len();
        let counts = class_counts(&self.classes, self.data.labels(), indices);
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || depth >= self.max_depth || n < 2 * self.min_leaf {
            return self.leaf(&counts);
        }

        // Best split: maximize sum(c_L^2)/n_L + sum(c_R^2)/n_R, which is
        // equivalent to minimizing the size-weighted child Gini impurity.
        let parent_score = purity_score(&counts, n as f64);
        let mut best: Option<(f64, usize, f64)> = None; // (score, feature, threshold)
        let mut sorted = indices.to_vec();
        for feature in 0..self.data.dim() {
            sorted.sort_unstable_by(|&a, &b| {
                self.data.row(a)[feature].total_cmp(&self.data.row(b)[feature])
            });
            let mut left = vec![0.0; self.classes.len()];
            let mut right = counts.clone();
            for cut in 1..n {
                let moved = sorted[cut - 1];
                let slot = self
                    .classes
                    .binary_search(&self.data.labels()[moved])
                    .expect("label seen at fit time");
                left[slot] += 1.0;
                right[slot] -= 1.0;

                if cut < self.min_leaf || n - cut < self.min_leaf {
                    continue;
                }
                let lo = self.data.row(sorted[cut - 1])[feature];
                let hi = self.data.row(sorted[cut])[feature];
                if !(hi > lo) {
                    continue; // no boundary between equal values
                }
                let score =
                    purity_score(&left, cut as f64) + purity_score(&right, (n - cut) as f64);
                if best.is_none_or(|(s, _, _)| score > s) {
                    // Midpoint, nudged back to `lo` if rounding lands on `hi`
                    // (records equal to the threshold go left).
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((score, feature, threshold));
                }
            }
        }

        let Some((score, feature, threshold)) = best else {
            return self.leaf(&counts);
        };
        if score - parent_score <= MIN_GAIN {
            return self.leaf(&counts);
        }

        // Order-preserving partition keeps the build deterministic.
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| self.data.row(i)[feature] <= threshold);

        self.nodes.push(Node::Leaf { label: 0 }); // placeholder
        let me = self.nodes.len() - 1;
        let left = self.build(&left_idx, depth + 1);
        let right = self.build(&right_idx, depth + 1);
        self.nodes[me] = Node::Split { feature, threshold, left, right };
        me
    }
}

impl TreeModel {
    pub(crate) fn fit(train: &Dataset, max_depth: usize, min_leaf: usize) -> Self {
        let mut builder = TreeBuilder {
            data: train,
            classes: train.class_set(),
            max_depth,
            min_leaf,
            nodes: Vec::new(),
        };
        let all: Vec<usize> = (0..train.n()).collect();
        let root = builder.build(&all, 0);
        debug_assert_eq!(root, 0, "root is built first");
        TreeModel { dim: train.dim(), nodes: builder.nodes }
    }

    pub(crate) fn predict(&self, x: &[f64]) -> u32 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Number of nodes (splits + leaves).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}
