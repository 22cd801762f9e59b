//! Frequency- and distance-based classifiers: majority, nearest centroid,
//! first nearest neighbor under tunable metrics, and triangle-kernel KNN.

use crate::dataset::Dataset;

use super::{sq_euclidean, weighted_majority};

/// Predicts the most frequent training label regardless of features.
#[derive(Clone, Debug)]
pub struct MajorityModel {
    pub(crate) dim: usize,
    class: u32,
}

impl MajorityModel {
    pub(crate) fn fit(train: &Dataset) -> Self {
        let class = weighted_majority(train.labels().iter().map(|&y| (y, 1.0)))
            .expect("training set is nonempty");
        MajorityModel { dim: train.dim(), class }
    }

    pub(crate) fn predict(&self) -> u32 {
        self.class
    }

    /// The constant class this model predicts.
    pub fn class(&self) -> u32 {
        self.class
    }
}

/// Predicts the class whose training centroid is nearest in squared
/// Euclidean distance (ties toward the smallest class id).
#[derive(Clone, Debug)]
pub struct MeanModel {
    pub(crate) dim: usize,
    /// `(class, centroid)` sorted by class id.
    centroids: Vec<(u32, Vec<f64>)>,
}

impl MeanModel {
    pub(crate) fn fit(train: &Dataset) -> Self {
        let dim = train.dim();
        let mut centroids: Vec<(u32, Vec<f64>, usize)> = Vec::new();
        for i in 0..train.n() {
            let y = train.label(i);
            let entry = match centroids.iter_mut().find(|(c, _, _)| *c == y) {
                Some(e) => e,
                None => {
                    centroids.push((y, vec![0.0; dim], 0));
                    centroids.last_mut().expect("just pushed")
                }
            };
            for (acc, v) in entry.1.iter_mut().zip(train.row(i)) {
                *acc += v;
            }
            entry.2 += 1;
        }
        centroids.sort_unstable_by_key(|(c, _, _)| *c);
        let centroids = centroids
            .into_iter()
            .map(|(c, sums, count)| {
                (c, sums.into_iter().map(|s| s / count as f64).collect())
            })
            .collect();
        MeanModel { dim, centroids }
    }

    pub(crate) fn predict(&self, x: &[f64]) -> u32 {
        let mut best = (f64::INFINITY, 0u32);
        // Class-sorted iteration plus strict improvement = smallest-id ties.
        for (class, centroid) in &self.centroids {
            let d = sq_euclidean(x, centroid);
            if d < best.0 {
                best = (d, *class);
            }
        }
        best.1
    }

    /// `(class, centroid)` pairs sorted by class id.
    pub fn centroids(&self) -> &[(u32, Vec<f64>)] {
        &self.centroids
    }
}

/// Distance used by the first-nearest-neighbor variants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FnnMetric {
    /// Two features: `omega * dx1^2 + omega^-1 * dx2^2`. At `omega = 1`
    /// this is plain squared Euclidean distance.
    Weighted { omega: f64 },
    /// Sixteen features split into three groups weighted `upsilon^(2-k)`
    /// for group k: C1 = {1,3,9,16} scaled by `upsilon`, C2 (the other
    /// nine) unscaled, C3 = {5,11,13} scaled by `1/upsilon`. At
    /// `upsilon = 1` this is plain squared Euclidean distance.
    Distorted { upsilon: f64 },
}

/// Exponent of `upsilon` applied to each of the sixteen features (1-based
/// groups C1 = {1,3,9,16}, C2 = {2,4,6,7,8,10,12,14,15}, C3 = {5,11,13}).
const DISTORTED_EXPONENT: [i32; 16] = [1, 0, 1, 0, -1, 0, 0, 0, 1, 0, -1, 0, -1, 0, 0, 1];

impl FnnMetric {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            FnnMetric::Weighted { omega } => {
                let d1 = a[0] - b[0];
                let d2 = a[1] - b[1];
                omega * d1 * d1 + d2 * d2 / omega
            }
            FnnMetric::Distorted { upsilon } => {
                let mut acc = 0.0;
                for ((&x, &y), &e) in a.iter().zip(b).zip(&DISTORTED_EXPONENT) {
                    let d = x - y;
                    acc += upsilon.powi(e) * d * d;
                }
                acc
            }
        }
    }
}

/// First nearest neighbor over a memorized training set.
#[derive(Clone, Debug)]
pub struct FnnModel {
    train: Dataset,
    metric: FnnMetric,
}

impl FnnModel {
    pub(crate) fn fit(train: &Dataset, metric: FnnMetric) -> Self {
        FnnModel { train: train.clone(), metric }
    }

    pub(crate) fn dim(&self) -> usize {
        self.train.dim()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> u32 {
        let mut best = (f64::INFINITY, 0u32);
        // Strict improvement keeps the earliest training record on ties.
        for i in 0..self.train.n() {
            let d = self.metric.distance(x, self.train.row(i));
            if d < best.0 {
                best = (d, self.train.label(i));
            }
        }
        best.1
    }
}

/// K-nearest-neighbor vote with a triangle kernel: each of the k nearest
/// records votes with weight `1 - d/d_(k+1)`, where `d_(k+1)` is the
/// Euclidean distance of the (k+1)-th neighbor.
///
/// Falls back to an unweighted vote when the training set has at most k
/// records or the normalizing distance is zero (all nearest neighbors
/// coincide with the query point).
#[derive(Clone, Debug)]
pub struct KnnModel {
    train: Dataset,
    k: usize,
}

impl KnnModel {
    pub(crate) fn fit(train: &Dataset, k: usize) -> Self {
        KnnModel { train: train.clone(), k }
    }

    pub(crate) fn dim(&self) -> usize {
        self.train.dim()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> u32 {
        let n = self.train.n();
        if n <= self.k {
            return weighted_majority(self.train.labels().iter().map(|&y| (y, 1.0)))
                .expect("training set is nonempty");
        }
        let mut dists: Vec<(f64, usize)> = (0..n)
            .map(|i| (sq_euclidean(x, self.train.row(i)).sqrt(), i))
            .collect();
        // Distance ties break toward the earliest training record.
        dists.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let d_next = dists[self.k].0;
        let neighbors = &dists[..self.k];
        let weight = |d: f64| -> f64 {
            if d_next > 0.0 {
                (1.0 - d / d_next).max(0.0)
            } else {
                1.0
            }
        };
        let total: f64 = neighbors.iter().map(|&(d, _)| weight(d)).sum();
        let votes = neighbors.iter().map(|&(d, i)| {
            let w = if total > 0.0 { weight(d) } else { 1.0 };
            (self.train.label(i), w)
        });
        weighted_majority(votes).expect("k >= 1")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ClassifierSpec, FittedModel};
    use crate::dataset::Dataset;

    fn data(rows: &[(&[f64], u32)]) -> Dataset {
        let dim = rows[0].0.len();
        let features: Vec<f64> = rows.iter().flat_map(|(x, _)| x.iter().copied()).collect();
        let labels: Vec<u32> = rows.iter().map(|&(_, y)| y).collect();
        Dataset::from_parts(features, dim, labels).unwrap()
    }

    #[test]
    fn majority_predicts_most_frequent() {
        let d = data(&[(&[0.0], 0), (&[1.0], 0), (&[2.0], 1)]);
        let m = fit(ClassifierSpec::Majority, &d, 0).unwrap();
        for x in [-10.0, 0.0, 99.0] {
            assert_eq!(m.predict(&[x]).unwrap(), 0);
        }
    }

    #[test]
    fn majority_tie_breaks_to_smallest_class() {
        let d = data(&[(&[0.0], 4), (&[1.0], 2), (&[2.0], 4), (&[3.0], 2)]);
        let m = fit(ClassifierSpec::Majority, &d, 0).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), 2);
    }

    #[test]
    fn majority_ignores_feature_permutation() {
        let d = data(&[(&[1.0, 9.0], 0), (&[2.0, 8.0], 1), (&[3.0, 7.0], 1)]);
        let swapped = data(&[(&[9.0, 1.0], 0), (&[8.0, 2.0], 1), (&[7.0, 3.0], 1)]);
        let m1 = fit(ClassifierSpec::Majority, &d, 0).unwrap();
        let m2 = fit(ClassifierSpec::Majority, &swapped, 0).unwrap();
        for x in [[0.0, 0.0], [5.0, -5.0]] {
            assert_eq!(m1.predict(&x).unwrap(), m2.predict(&x).unwrap());
        }
    }

    #[test]
    fn mean_threshold_at_centroid_midpoint() {
        // Centroids at 0 and 10: the decision threshold sits at 5.
        let d = data(&[(&[-1.0], 3), (&[1.0], 3), (&[9.0], 7), (&[11.0], 7)]);
        let m = fit(ClassifierSpec::Mean, &d, 0).unwrap();
        assert_eq!(m.predict(&[4.9]).unwrap(), 3);
        assert_eq!(m.predict(&[5.1]).unwrap(), 7);
        // Equidistant: smaller class id wins.
        assert_eq!(m.predict(&[5.0]).unwrap(), 3);
    }

    #[test]
    fn mean_equals_first_nn_on_centroids() {
        let d = data(&[
            (&[0.0, 0.0], 0),
            (&[0.0, 2.0], 0),
            (&[4.0, 4.0], 1),
            (&[6.0, 4.0], 1),
            (&[0.0, 8.0], 2),
            (&[2.0, 10.0], 2),
        ]);
        let mean = fit(ClassifierSpec::Mean, &d, 0).unwrap();
        // Hand-computed centroids: (0,1), (5,4), (1,9).
        let centroids = data(&[(&[0.0, 1.0], 0), (&[5.0, 4.0], 1), (&[1.0, 9.0], 2)]);
        let nn = fit(ClassifierSpec::FnnWeighted { omega: 1.0 }, &centroids, 0).unwrap();
        for x1 in [-1.0, 0.5, 2.0, 3.5, 5.0, 7.0] {
            for x2 in [0.0, 1.5, 4.0, 6.5, 9.0] {
                let q = [x1, x2];
                assert_eq!(mean.predict(&q).unwrap(), nn.predict(&q).unwrap(), "query {q:?}");
            }
        }
    }

    #[test]
    fn fnn_weighted_unit_omega_is_euclidean() {
        let d = data(&[(&[0.0, 0.0], 1), (&[1.0, 1.0], 2)]);
        let m = fit(ClassifierSpec::FnnWeighted { omega: 1.0 }, &d, 0).unwrap();
        assert_eq!(m.predict(&[0.1, 0.0]).unwrap(), 1);
        assert_eq!(m.predict(&[0.9, 1.0]).unwrap(), 2);
    }

    #[test]
    fn fnn_weighted_omega_rescales_axes() {
        // Query at the origin: (2,0) is 4 away on axis 1, (0,1) is 1 away on
        // axis 2. Plain Euclidean prefers (0,1); omega = 0.1 discounts axis 1
        // and penalizes axis 2, flipping the winner.
        let d = data(&[(&[2.0, 0.0], 0), (&[0.0, 1.0], 1)]);
        let unit = fit(ClassifierSpec::FnnWeighted { omega: 1.0 }, &d, 0).unwrap();
        assert_eq!(unit.predict(&[0.0, 0.0]).unwrap(), 1);
        let skewed = fit(ClassifierSpec::FnnWeighted { omega: 0.1 }, &d, 0).unwrap();
        assert_eq!(skewed.predict(&[0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn fnn_tie_breaks_to_earliest_record() {
        let d = data(&[(&[0.0, 1.0], 5), (&[1.0, 0.0], 3)]);
        let m = fit(ClassifierSpec::FnnWeighted { omega: 1.0 }, &d, 0).unwrap();
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 5);
    }

    fn dim16_row(seed: usize) -> Vec<f64> {
        (0..16).map(|j| ((seed * 31 + j * 17) % 101) as f64 / 10.0).collect()
    }

    #[test]
    fn fnn_distorted_unit_upsilon_is_euclidean() {
        let rows: Vec<(Vec<f64>, u32)> =
            (0..8).map(|i| (dim16_row(i), (i % 3) as u32)).collect();
        let borrowed: Vec<(&[f64], u32)> =
            rows.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
        let d = data(&borrowed);
        let m = fit(ClassifierSpec::FnnDistorted { upsilon: 1.0 }, &d, 0).unwrap();
        for q in 20..25 {
            let query = dim16_row(q);
            // Brute-force Euclidean nearest record.
            let want = (0..d.n())
                .min_by(|&a, &b| {
                    sq_euclidean(&query, d.row(a)).total_cmp(&sq_euclidean(&query, d.row(b)))
                })
                .map(|i| d.label(i))
                .unwrap();
            assert_eq!(m.predict(&query).unwrap(), want);
        }
    }

    #[test]
    fn fnn_distorted_upsilon_reweights_groups() {
        // Two training points, each offset from the query by 1.0 in a single
        // feature: feature 1 is in C1 (scaled by upsilon), feature 5 in C3
        // (scaled by 1/upsilon). At upsilon = 1 the tie goes to the earlier
        // record; at upsilon = 4 the C3 offset becomes much cheaper.
        let query = vec![0.0; 16];
        let mut p1 = vec![0.0; 16];
        p1[0] = 1.0; // feature 1 (C1)
        let mut p2 = vec![0.0; 16];
        p2[4] = 1.0; // feature 5 (C3)
        let d = data(&[(&p1, 10), (&p2, 20)]);

        let unit = fit(ClassifierSpec::FnnDistorted { upsilon: 1.0 }, &d, 0).unwrap();
        assert_eq!(unit.predict(&query).unwrap(), 10);
        let skewed = fit(ClassifierSpec::FnnDistorted { upsilon: 4.0 }, &d, 0).unwrap();
        assert_eq!(skewed.predict(&query).unwrap(), 20);
    }

    #[test]
    fn knn_triangle_kernel_hand_example() {
        let d = data(&[
            (&[0.0], 0),
            (&[1.0], 0),
            (&[2.0], 0),
            (&[3.0], 1),
            (&[4.0], 1),
            (&[10.0], 1),
        ]);
        let m = fit(ClassifierSpec::Knn { k: 5 }, &d, 0).unwrap();
        // Query 0: neighbors 0..4 at distances 0..4, d_6 = 10.
        // Class-0 weight 1 + 0.9 + 0.8 = 2.7, class-1 weight 0.7 + 0.6 = 1.3.
        assert_eq!(m.predict(&[0.0]).unwrap(), 0);
        // Query 4: distances (4,3,2,1,0) with d_6 = 6.
        // Class-0 weight 1/3 + 1/2 + 2/3 = 1.5, class-1 weight 5/6 + 1 = 11/6.
        assert_eq!(m.predict(&[4.0]).unwrap(), 1);
    }

    #[test]
    fn knn_small_training_set_votes_unweighted() {
        let d = data(&[(&[0.0], 1), (&[1.0], 1), (&[2.0], 2)]);
        let m = fit(ClassifierSpec::Knn { k: 5 }, &d, 0).unwrap();
        // Only three records: plain majority everywhere, even next to the
        // class-2 point.
        assert_eq!(m.predict(&[2.0]).unwrap(), 1);
    }

    #[test]
    fn knn_zero_normalizer_falls_back_to_unweighted() {
        // Six coincident points: d_(k+1) = 0 would zero every weight.
        let d = data(&[
            (&[5.0], 0),
            (&[5.0], 0),
            (&[5.0], 0),
            (&[5.0], 1),
            (&[5.0], 1),
            (&[5.0], 1),
        ]);
        let m = fit(ClassifierSpec::Knn { k: 5 }, &d, 0).unwrap();
        // First five records by index: three 0-votes, two 1-votes.
        assert_eq!(m.predict(&[5.0]).unwrap(), 0);
    }

    #[test]
    fn knn_is_exact_on_training_points_with_tight_clusters() {
        let d = data(&[
            (&[0.0, 0.0], 0),
            (&[0.1, 0.0], 0),
            (&[0.0, 0.1], 0),
            (&[0.1, 0.1], 0),
            (&[9.0, 9.0], 1),
            (&[9.1, 9.0], 1),
            (&[9.0, 9.1], 1),
            (&[9.1, 9.1], 1),
        ]);
        let m = fit(ClassifierSpec::Knn { k: 3 }, &d, 0).unwrap();
        let FittedModel::Knn(_) = &m else { panic!("expected knn") };
        assert_eq!(m.error_rate(&d).unwrap(), 0.0);
    }
}
