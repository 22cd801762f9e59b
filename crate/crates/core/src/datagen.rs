//! Synthetic populations with known ground truth: the epsilon loss-vector
//! generator, the six-class EXP6 geometric problem, and the 1-D two-Gaussian
//! "simple" problem.
//!
//! Each generator is a pure function of `(config, seed)`, so independent
//! replications parallelize by deriving per-replication seeds. Alongside the
//! samplers live the population oracles the Monte Carlo harness calibrates
//! against: the full 22,801-point EXP6 grid, closed-form error rates for
//! linear rules on the simple problem, and the analytic disagreement
//! probability of the epsilon generator.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dist::normal_cdf;
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Epsilon loss-vector generator
// ---------------------------------------------------------------------------

/// Configuration of the epsilon generator: `n` records whose one-zero losses
/// under two virtual algorithms are drawn directly, with no features or
/// classifiers involved.
///
/// On the first half of the records algorithm A errs with probability
/// `epsilon/2` and B with `3*epsilon/2`; on the second half the rates swap.
/// Both marginal error rates are exactly `epsilon`, so the null hypothesis
/// of equal error rates holds by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConfig {
    pub n: usize,
    pub epsilon: f64,
}

impl EpsilonConfig {
    /// Requires `n >= 1` and `epsilon` in [0, 2/3] so that `3*epsilon/2`
    /// is a valid probability.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("epsilon generator needs n >= 1".into()));
        }
        if !(0.0..=2.0 / 3.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {} outside [0, 2/3]",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Draws the two loss vectors (`true` = misclassified).
///
/// Records `0 .. n/2` use rates `(epsilon/2, 3*epsilon/2)` for (A, B);
/// records `n/2 .. n` use the swapped rates. Losses are independent across
/// records and between algorithms; each record draws A's bit first.
pub fn epsilon_losses(cfg: &EpsilonConfig, seed: u64) -> Result<(Vec<bool>, Vec<bool>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = cfg.n / 2;
    let lo = cfg.epsilon / 2.0;
    let hi = 3.0 * cfg.epsilon / 2.0;
    let mut loss_a = Vec::with_capacity(cfg.n);
    let mut loss_b = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let (rate_a, rate_b) = if i < half { (lo, hi) } else { (hi, lo) };
        loss_a.push(rng.gen_bool(rate_a));
        loss_b.push(rng.gen_bool(rate_b));
    }
    Ok((loss_a, loss_b))
}

/// Population probability that the two epsilon algorithms disagree on a
/// record: `p*(1-q) + q*(1-p)` with `(p, q) = (eps/2, 3*eps/2)`, which is
/// the same on both halves by symmetry and simplifies to
/// `2*eps - 3*eps^2/2`.
pub fn epsilon_disagreement_prob(epsilon: f64) -> f64 {
    2.0 * epsilon - 1.5 * epsilon * epsilon
}

// ---------------------------------------------------------------------------
// EXP6 six-class geometric problem
// ---------------------------------------------------------------------------

/// Configuration of the EXP6 sampler: `n` points drawn uniformly (with
/// replacement) from the fixed `[0, 15]^2` grid of resolution 0.1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exp6Config {
    pub n: usize,
}

/// Points per grid axis: `15 / 0.1 + 1`.
pub const EXP6_GRID_SIDE: usize = 151;
/// Total grid points: `151^2`.
pub const EXP6_GRID_POINTS: usize = EXP6_GRID_SIDE * EXP6_GRID_SIDE;

/// The three boundary curves `(f1, f2, f3)` at horizontal position `x`:
/// `f1 = x^2 - 4x + 6`, `f2 = 4*sin(x/2) + 8`,
/// `f3 = -(x^2 - 108x + 236)/25`.
pub fn exp6_boundaries(x: f64) -> (f64, f64, f64) {
    let f1 = x * x - 4.0 * x + 6.0;
    let f2 = 4.0 * (x / 2.0).sin() + 8.0;
    let f3 = -(x * x - 108.0 * x + 236.0) / 25.0;
    (f1, f2, f3)
}

/// Class label (1 ..= 6, read as Y1 ..= Y6) of the point `(x1, x2)`.
///
/// The label is the first matching case of the sign pattern of
/// `x2 - f1(x1)`, `x2 - f2(x1)`, `x2 - f3(x1)`:
///
/// * Y1: above f1 and above f2;
/// * Y2: below f1, above f2, above f3;
/// * Y3: above f1, below f2;
/// * Y4: below f1, below f2, above f3;
/// * Y5: below f1, above f2, below f3;
/// * Y6: below all three.
///
/// ("Above" means `>= 0` of the difference.) The six cases tile the plane:
/// [`exp6_match_count`] is exactly 1 everywhere, which the tests verify by
/// full grid enumeration.
pub fn exp6_label(x1: f64, x2: f64) -> u32 {
    let (f1, f2, f3) = exp6_boundaries(x1);
    let above1 = x2 - f1 >= 0.0;
    let above2 = x2 - f2 >= 0.0;
    let above3 = x2 - f3 >= 0.0;
    if above1 && above2 {
        1
    } else if !above1 && above2 && above3 {
        2
    } else if above1 && !above2 {
        3
    } else if !above1 && !above2 && above3 {
        4
    } else if !above1 && above2 && !above3 {
        5
    } else {
        debug_assert!(!above1 && !above2 && !above3);
        6
    }
}

/// Number of the six (mutually exclusive) EXP6 case patterns that match the
/// point — an audit hook for the tiling property; always 1 if the case
/// analysis is exhaustive and exclusive.
pub fn exp6_match_count(x1: f64, x2: f64) -> usize {
    let (f1, f2, f3) = exp6_boundaries(x1);
    let a1 = x2 - f1 >= 0.0;
    let a2 = x2 - f2 >= 0.0;
    let a3 = x2 - f3 >= 0.0;
    [
        a1 && a2,
        !a1 && a2 && a3,
        a1 && !a2,
        !a1 && !a2 && a3,
        !a1 && a2 && !a3,
        !a1 && !a2 && !a3,
    ]
    .iter()
    .filter(|&&m| m)
    .count()
}

/// Grid coordinate of axis index `i` (exact multiples of 0.1 as f64).
fn grid_coord(i: usize) -> f64 {
    i as f64 * 0.1
}

fn grid_point(index: usize) -> (f64, f64) {
    let i1 = index / EXP6_GRID_SIDE;
    let i2 = index % EXP6_GRID_SIDE;
    (grid_coord(i1), grid_coord(i2))
}

/// The complete labeled 22,801-point EXP6 grid, built once per process and
/// cached in memory (enumeration takes microseconds). Used as the population
/// truth oracle for EXP6 error rates.
pub fn exp6_population() -> &'static Dataset {
    static POPULATION: OnceLock<Dataset> = OnceLock::new();
    POPULATION.get_or_init(|| {
        let mut features = Vec::with_capacity(2 * EXP6_GRID_POINTS);
        let mut labels = Vec::with_capacity(EXP6_GRID_POINTS);
        for index in 0..EXP6_GRID_POINTS {
            let (x1, x2) = grid_point(index);
            features.push(x1);
            features.push(x2);
            labels.push(exp6_label(x1, x2));
        }
        Dataset::from_parts(features, 2, labels).expect("grid dimensions are consistent")
    })
}

/// Draws `n` grid points uniformly with replacement and labels them.
pub fn exp6_sample(cfg: &Exp6Config, seed: u64) -> Result<Dataset> {
    if cfg.n == 0 {
        return Err(Error::InvalidConfig("exp6 sampler needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(2 * cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let (x1, x2) = grid_point(rng.gen_range(0..EXP6_GRID_POINTS));
        features.push(x1);
        features.push(x2);
        labels.push(exp6_label(x1, x2));
    }
    Dataset::from_parts(features, 2, labels)
}

/// Draws `n` distinct grid points uniformly without replacement (the
/// correlation-sweep sampling protocol).
pub fn exp6_sample_without_replacement(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || n > EXP6_GRID_POINTS {
        return Err(Error::InvalidConfig(format!(
            "without-replacement sample size {n} outside 1 ..= {EXP6_GRID_POINTS}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, EXP6_GRID_POINTS, n);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for index in picks {
        let (x1, x2) = grid_point(index);
        features.push(x1);
        features.push(x2);
        labels.push(exp6_label(x1, x2));
    }
    Dataset::from_parts(features, 2, labels)
}

// ---------------------------------------------------------------------------
// Simple 1-D two-Gaussian problem
// ---------------------------------------------------------------------------

/// Configuration of the simple binary problem: balanced labels, one feature
/// with `x | Y0 ~ N(0, 1)` and `x | Y1 ~ N(delta, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleConfig {
    pub n: usize,
    pub delta: f64,
}

impl SimpleConfig {
    /// Requires `n >= 1` and `delta` in [0, 1] (the studied sweep range).
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("simple generator needs n >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidConfig(format!(
                "delta = {} outside [0, 1]",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Samples the simple problem: per record, a Bernoulli(0.5) label is drawn
/// first, then the conditional normal feature.
pub fn simple_sample(cfg: &SimpleConfig, seed: u64) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let y: u32 = rng.gen_bool(0.5) as u32;
        let z: f64 = StandardNormal.sample(&mut rng);
        features.push(if y == 1 { z + cfg.delta } else { z });
        labels.push(y);
    }
    Dataset::from_parts(features, 1, labels)
}

/// Bayes error of the simple problem: the optimal rule thresholds at
/// `delta/2`, giving error `Phi(-delta/2)`.
pub fn simple_bayes_error(delta: f64) -> f64 {
    normal_cdf(-delta / 2.0)
}

/// Population error of the threshold rule "predict Y1 iff `x > threshold`"
/// (or `x < threshold` when `hi_above` is false) on the simple problem:
/// an equal mixture of the two conditional normals' misclassified tails.
pub fn simple_rule_error(threshold: f64, hi_above: bool, delta: f64) -> f64 {
    if hi_above {
        // Wrong on Y0 when x > threshold; wrong on Y1 when x <= threshold.
        0.5 * (1.0 - normal_cdf(threshold)) + 0.5 * normal_cdf(threshold - delta)
    } else {
        0.5 * normal_cdf(threshold) + 0.5 * (1.0 - normal_cdf(threshold - delta))
    }
}
