//! Property tests of the partition schemes: for random sizes and seeds,
//! the design invariants must hold everywhere, not just on the worked
//! examples in the unit tests.

use blockcv::partition::{
    bcv_5x2_partitions_n, kfold_partitions_n, overlap_count, split_holdout_n,
};
use proptest::prelude::*;

/// `train` and `valid` must be sorted, disjoint, and together cover `0..n`.
fn assert_covering(train: &[usize], valid: &[usize], n: usize) {
    let mut seen = vec![false; n];
    for &i in train.iter().chain(valid) {
        assert!(i < n, "index {i} out of range");
        assert!(!seen[i], "index {i} appears twice");
        seen[i] = true;
    }
    assert!(seen.iter().all(|&s| s), "some index is missing");
    assert!(train.windows(2).all(|w| w[0] < w[1]), "train not sorted");
    assert!(valid.windows(2).all(|w| w[0] < w[1]), "valid not sorted");
}

proptest! {
    /// Blocks partition the index range evenly; every split covers it; the
    /// ten pairwise training overlaps stay inside the documented slack and
    /// are exactly n/4 whenever 8 divides n.
    #[test]
    fn bcv_partitions_obey_the_design(n in 8usize..260, seed in any::<u64>()) {
        let p = bcv_5x2_partitions_n(n, seed).unwrap();

        prop_assert_eq!(p.blocks.len(), 8);
        let sizes: Vec<usize> = p.blocks.iter().map(Vec::len).collect();
        let (min, max) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        prop_assert!(max - min <= 1, "block sizes {:?}", sizes);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);

        prop_assert_eq!(p.pairs.len(), 5);
        for pair in &p.pairs {
            assert_covering(&pair.train, &pair.valid, n);
            prop_assert!(pair.train.len().abs_diff(pair.valid.len()) <= 2);
        }

        let (lo, hi) = (n / 4 - 1, n.div_ceil(4) + 1);
        for i in 0..5 {
            for j in (i + 1)..5 {
                let o = overlap_count(&p.pairs[i], &p.pairs[j]);
                if n % 8 == 0 {
                    prop_assert_eq!(o, n / 4, "overlap({}, {})", i, j);
                } else {
                    prop_assert!((lo..=hi).contains(&o), "overlap({}, {}) = {}", i, j, o);
                }
            }
        }
    }

    /// Same seed, same plan; the partition is a pure function of (n, seed).
    #[test]
    fn bcv_is_seed_deterministic(n in 8usize..200, seed in any::<u64>()) {
        prop_assert_eq!(
            bcv_5x2_partitions_n(n, seed).unwrap(),
            bcv_5x2_partitions_n(n, seed).unwrap()
        );
    }

    /// The ten folds come in (train, valid) and (valid, train) pairs.
    #[test]
    fn bcv_folds_alternate_sides(n in 8usize..200, seed in any::<u64>()) {
        let p = bcv_5x2_partitions_n(n, seed).unwrap();
        let folds: Vec<_> = p.folds().collect();
        prop_assert_eq!(folds.len(), 10);
        for (j, pair) in p.pairs.iter().enumerate() {
            prop_assert_eq!(folds[2 * j].0, pair.train.as_slice());
            prop_assert_eq!(folds[2 * j].1, pair.valid.as_slice());
            prop_assert_eq!(folds[2 * j + 1].0, pair.valid.as_slice());
            prop_assert_eq!(folds[2 * j + 1].1, pair.train.as_slice());
        }
    }

    /// K-fold validation folds are disjoint, cover everything, and differ
    /// in size by at most one; each training set is the complement.
    #[test]
    fn kfold_partitions_cover(n in 4usize..260, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold_partitions_n(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);

        let mut seen = vec![false; n];
        let mut sizes = Vec::with_capacity(k);
        for pair in &folds {
            assert_covering(&pair.train, &pair.valid, n);
            for &i in &pair.valid {
                prop_assert!(!seen[i], "index {} in two validation folds", i);
                seen[i] = true;
            }
            sizes.push(pair.valid.len());
        }
        prop_assert!(seen.iter().all(|&s| s));
        let (min, max) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        prop_assert!(max - min <= 1, "fold sizes {:?}", sizes);
    }

    /// The hold-out split honors the rounded training fraction.
    #[test]
    fn holdout_respects_the_fraction(
        n in 3usize..500,
        frac in 0.2f64..0.8,
        seed in any::<u64>(),
    ) {
        let expected = (frac * n as f64).round() as usize;
        prop_assume!(expected > 0 && expected < n);
        let pair = split_holdout_n(n, frac, seed).unwrap();
        assert_covering(&pair.train, &pair.valid, n);
        prop_assert_eq!(pair.train.len(), expected);
    }
}
