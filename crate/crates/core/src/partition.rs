//! Data-splitting schemes: hold-out, K-fold CV, and the 5x2 block-regularized
//! CV (BCV).
//!
//! The 5x2 BCV shuffles the index range once, cuts it into eight near-equal
//! sub-blocks D1..D8, and assembles five two-fold splits from fixed rows of an
//! orthogonal-array design:
//!
//! | pair | training blocks  |
//! |------|------------------|
//! | 1    | D1, D2, D3, D4   |
//! | 2    | D1, D3, D5, D7   |
//! | 3    | D1, D2, D5, D6   |
//! | 4    | D1, D4, D5, D8   |
//! | 5    | D1, D3, D6, D8   |
//!
//! Any two distinct rows share exactly two blocks, so when 8 divides n every
//! pairwise training-set overlap is exactly n/4 — the regularization that
//! stabilizes the variance of cross-validated error estimates. Each pair is
//! used in a round-robin manner: fold 1 trains on the row's blocks and
//! validates on the complement, fold 2 swaps the roles.
//!
//! All operations are pure functions of `(n, seed)` and return index sets in
//! sorted order, so equal inputs give bitwise-equal partitions.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Training blocks (0-based) per pair of the 5x2 BCV design.
pub const BCV_ROWS: [[usize; 4]; 5] = [
    [0, 1, 2, 3],
    [0, 2, 4, 6],
    [0, 1, 4, 5],
    [0, 3, 4, 7],
    [0, 2, 5, 7],
];

/// When 8 does not divide n, the r = n mod 8 leftover records go to these
/// blocks (0-based), one each, in order. The order is chosen so that every
/// pair's training-set size stays within 1 of n/2 for every r in 1..=7:
/// D1 appears in all five rows and never takes an extra, and consecutive
/// entries alternate across rows.
const EXTRA_PRIORITY: [usize; 7] = [1, 4, 7, 6, 2, 5, 3];

/// One train/validation split over the index range `0..n`.
///
/// Both index sets are sorted, disjoint, and together cover `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPair {
    /// Training index set S.
    pub train: Vec<usize>,
    /// Validation index set T.
    pub valid: Vec<usize>,
}

/// The eight sub-blocks and five regularized splits of a 5x2 BCV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSet5x2 {
    /// Disjoint sub-blocks D1..D8 (sorted indices, sizes differ by <= 1).
    pub blocks: Vec<Vec<usize>>,
    /// The five splits assembled from [`BCV_ROWS`].
    pub pairs: Vec<SplitPair>,
}

impl PartitionSet5x2 {
    /// The ten (train, validation) folds in round-robin order: for each pair
    /// j = 1..5, fold k = 1 trains on S_j, fold k = 2 trains on T_j.
    pub fn folds(&self) -> impl Iterator<Item = (&[usize], &[usize])> {
        self.pairs.iter().flat_map(|p| {
            [
                (p.train.as_slice(), p.valid.as_slice()),
                (p.valid.as_slice(), p.train.as_slice()),
            ]
        })
    }
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices
}

/// Uniformly random hold-out split with `round(train_fraction * n)` training
/// records. Deterministic given `seed`.
pub fn split_holdout_n(n: usize, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::DegenerateSplit(format!(
            "train fraction {train_fraction} outside [0, 1]"
        )));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::DegenerateSplit(format!(
            "fraction {train_fraction} of n={n} leaves an empty side (train size {n_train})"
        )));
    }
    let indices = shuffled_indices(n, seed);
    let mut train: Vec<usize> = indices[..n_train].to_vec();
    let mut valid: Vec<usize> = indices[n_train..].to_vec();
    train.sort_unstable();
    valid.sort_unstable();
    Ok(SplitPair { train, valid })
}

/// Hold-out split of a dataset.
pub fn split_holdout(data: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    split_holdout_n(data.n(), train_fraction, seed)
}

/// K-fold partition: K disjoint validation folds covering `0..n`, sizes
/// differing by at most one; each fold's training set is its complement.
pub fn kfold_partitions_n(n: usize, k: usize, seed: u64) -> Result<Vec<SplitPair>> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    let indices = shuffled_indices(n, seed);
    let base = n / k;
    let extras = n % k;
    let mut splits = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extras);
        let end = start + size;
        let mut valid: Vec<usize> = indices[start..end].to_vec();
        let mut train: Vec<usize> = indices[..start]
            .iter()
            .chain(&indices[end..])
            .copied()
            .collect();
        valid.sort_unstable();
        train.sort_unstable();
        splits.push(SplitPair { train, valid });
        start = end;
    }
    Ok(splits)
}

/// K-fold partition of a dataset.
pub fn kfold_partitions(data: &Dataset, k: usize, seed: u64) -> Result<Vec<SplitPair>> {
    kfold_partitions_n(data.n(), k, seed)
}

/// 5x2 block-regularized partition of `0..n` (requires n >= 8).
///
/// Indices are shuffled once by `seed` and cut into eight sub-blocks; the
/// five splits follow [`BCV_ROWS`]. With 8 | n all ten pairwise training
/// overlaps equal n/4 exactly; otherwise block sizes differ by at most one
/// and overlaps stay within `[floor(n/4) - 1, ceil(n/4) + 1]`.
pub fn bcv_5x2_partitions_n(n: usize, seed: u64) -> Result<PartitionSet5x2> {
    if n < 8 {
        return Err(Error::DatasetTooSmall { n, min: 8 });
    }
    let indices = shuffled_indices(n, seed);

    let base = n / 8;
    let extras = n % 8;
    let mut sizes = [base; 8];
    for &block in EXTRA_PRIORITY.iter().take(extras) {
        sizes[block] += 1;
    }

    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(8);
    let mut start = 0;
    for size in sizes {
        let mut block: Vec<usize> = indices[start..start + size].to_vec();
        block.sort_unstable();
        blocks.push(block);
        start += size;
    }

    let pairs = BCV_ROWS
        .iter()
        .map(|row| {
            let mut train = Vec::with_capacity(n / 2 + 1);
            let mut valid = Vec::with_capacity(n / 2 + 1);
            for (b, block) in blocks.iter().enumerate() {
                if row.contains(&b) {
                    train.extend_from_slice(block);
                } else {
                    valid.extend_from_slice(block);
                }
            }
            train.sort_unstable();
            valid.sort_unstable();
            SplitPair { train, valid }
        })
        .collect();

    Ok(PartitionSet5x2 { blocks, pairs })
}

/// 5x2 block-regularized partition of a dataset.
pub fn bcv_5x2_partitions(data: &Dataset, seed: u64) -> Result<PartitionSet5x2> {
    bcv_5x2_partitions_n(data.n(), seed)
}

/// Size of the intersection of two training sets (both sorted).
pub fn overlap_count(a: &SplitPair, b: &SplitPair) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.train.len() && j < b.train.len() {
        match a.train[i].cmp(&b.train[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
