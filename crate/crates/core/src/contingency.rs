//! Contingency tables and their estimators, Beta posteriors, averaged and
//! effective tables, and empirical correlation estimation.
//!
//! A 2x2 contingency table classifies each validation record by the joint
//! correctness of two classifiers A and B:
//!
//! | cell | meaning                          |
//! |------|----------------------------------|
//! | n00  | misclassified by both            |
//! | n01  | misclassified by A but not by B  |
//! | n10  | misclassified by B but not by A  |
//! | n11  | misclassified by neither         |
//!
//! Four derived quantities drive the tests: the disagreement probability
//! `e = p01 + p10`, the conditional error `r = p01 / (p01 + p10)` (H0 is
//! r = 0.5), and the two conditionals `q_a`, `q_b`. With a Beta(lambda,
//! lambda) prior each has a Beta posterior given the table; with lambda = 1
//! the posterior modes coincide exactly with the plug-in estimators.
//!
//! A 5x2 BCV run yields ten correlated tables. Their cell-wise mean (the
//! averaged table) and a correlation-dependent rescaling (the effective
//! table, cells multiplied by t = 10 / (1 + rho1 + 8*rho2)) compress the run
//! into a single virtual table whose posterior modes and estimator variance
//! match those of the full run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint-correctness counts of two classifiers on one validation set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// Records misclassified by both algorithms.
    pub n00: u64,
    /// Records misclassified by A only.
    pub n01: u64,
    /// Records misclassified by B only.
    pub n10: u64,
    /// Records misclassified by neither.
    pub n11: u64,
}

impl ContingencyTable {
    /// Validation-set size (cell sum).
    pub fn n2(&self) -> u64 {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    /// Plug-in estimators of e, r, q_a, q_b.
    pub fn estimators(&self) -> Estimators {
        estimators_from_cells(self.n00 as f64, self.n01 as f64, self.n10 as f64, self.n11 as f64)
    }

    /// Beta posterior parameters under a `Be(lambda, lambda)` prior.
    pub fn posterior_params(&self, lambda: f64) -> Result<BetaPosteriors> {
        posterior_from_cells(
            self.n00 as f64,
            self.n01 as f64,
            self.n10 as f64,
            self.n11 as f64,
            lambda,
        )
    }
}

/// Builds a table from true labels and the two algorithms' predictions.
pub fn table_from_predictions(
    y_true: &[u32],
    yhat_a: &[u32],
    yhat_b: &[u32],
) -> Result<ContingencyTable> {
    if y_true.len() != yhat_a.len() || y_true.len() != yhat_b.len() {
        return Err(Error::LengthMismatch(format!(
            "labels {}, predictions A {}, predictions B {}",
            y_true.len(),
            yhat_a.len(),
            yhat_b.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::LengthMismatch("empty validation set".into()));
    }
    let mut table = ContingencyTable { n00: 0, n01: 0, n10: 0, n11: 0 };
    for i in 0..y_true.len() {
        let wrong_a = yhat_a[i] != y_true[i];
        let wrong_b = yhat_b[i] != y_true[i];
        match (wrong_a, wrong_b) {
            (true, true) => table.n00 += 1,
            (true, false) => table.n01 += 1,
            (false, true) => table.n10 += 1,
            (false, false) => table.n11 += 1,
        }
    }
    Ok(table)
}

/// Builds a table directly from one-zero loss vectors (`true` = wrong),
/// used by the epsilon generator which has no features or classifiers.
pub fn table_from_losses(loss_a: &[bool], loss_b: &[bool]) -> Result<ContingencyTable> {
    if loss_a.len() != loss_b.len() {
        return Err(Error::LengthMismatch(format!(
            "loss vectors {} vs {}",
            loss_a.len(),
            loss_b.len()
        )));
    }
    if loss_a.is_empty() {
        return Err(Error::LengthMismatch("empty validation set".into()));
    }
    let mut table = ContingencyTable { n00: 0, n01: 0, n10: 0, n11: 0 };
    for (&a, &b) in loss_a.iter().zip(loss_b) {
        match (a, b) {
            (true, true) => table.n00 += 1,
            (true, false) => table.n01 += 1,
            (false, true) => table.n10 += 1,
            (false, false) => table.n11 += 1,
        }
    }
    Ok(table)
}

/// Cell-wise mean of the ten tables from one 5x2 BCV run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedTable {
    pub nbar00: f64,
    pub nbar01: f64,
    pub nbar10: f64,
    pub nbar11: f64,
}

impl AveragedTable {
    /// Cell sum; equals n/2 when built from a complete run on n records.
    pub fn sum(&self) -> f64 {
        self.nbar00 + self.nbar01 + self.nbar10 + self.nbar11
    }

    /// Plug-in estimators on the averaged cells.
    pub fn estimators(&self) -> Estimators {
        estimators_from_cells(self.nbar00, self.nbar01, self.nbar10, self.nbar11)
    }
}

/// Averages exactly ten fold tables (cell-wise mean).
pub fn average_table(tables: &[ContingencyTable]) -> Result<AveragedTable> {
    if tables.len() != 10 {
        return Err(Error::WrongTableCount { expected: 10, got: tables.len() });
    }
    let mut sums = [0.0f64; 4];
    for t in tables {
        sums[0] += t.n00 as f64;
        sums[1] += t.n01 as f64;
        sums[2] += t.n10 as f64;
        sums[3] += t.n11 as f64;
    }
    Ok(AveragedTable {
        nbar00: sums[0] / 10.0,
        nbar01: sums[1] / 10.0,
        nbar10: sums[2] / 10.0,
        nbar11: sums[3] / 10.0,
    })
}

/// The virtual real-valued table compressing a 5x2 BCV run: cells are the
/// averaged cells scaled by `t = 10 / (1 + rho1 + 8*rho2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTable {
    pub ne00: f64,
    pub ne01: f64,
    pub ne10: f64,
    pub ne11: f64,
    /// Effective validation size `5n / (1 + rho1 + 8*rho2)`.
    pub n_e: f64,
    /// Compression factor `10 / (1 + rho1 + 8*rho2)`.
    pub t: f64,
}

impl EffectiveTable {
    /// Cell sum; equals `n_e` when the averaged table sums to n/2.
    pub fn sum(&self) -> f64 {
        self.ne00 + self.ne01 + self.ne10 + self.ne11
    }

    /// Plug-in estimators on the effective cells.
    pub fn estimators(&self) -> Estimators {
        estimators_from_cells(self.ne00, self.ne01, self.ne10, self.ne11)
    }

    /// Beta posterior parameters under a `Be(lambda, lambda)` prior, with the
    /// real-valued effective cells as pseudo-counts.
    pub fn posterior_params(&self, lambda: f64) -> Result<BetaPosteriors> {
        posterior_from_cells(self.ne00, self.ne01, self.ne10, self.ne11, lambda)
    }
}

/// Builds the effective table for a dataset of size `n`.
///
/// Requires `1 + rho1 + 8*rho2 > 0`.
pub fn effective_table(
    avg: &AveragedTable,
    rho1: f64,
    rho2: f64,
    n: usize,
) -> Result<EffectiveTable> {
    let kappa = 1.0 + rho1 + 8.0 * rho2;
    if !(kappa > 0.0) {
        return Err(Error::InvalidRho(kappa));
    }
    let t = 10.0 / kappa;
    Ok(EffectiveTable {
        ne00: t * avg.nbar00,
        ne01: t * avg.nbar01,
        ne10: t * avg.nbar10,
        ne11: t * avg.nbar11,
        n_e: 5.0 * n as f64 / kappa,
        t,
    })
}

/// Plug-in estimators of the four table-derived probabilities.
///
/// Ratios with zero denominators are `None` rather than NaN so callers can
/// distinguish "no disagreements" from a numeric 0/0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimators {
    /// Disagreement proportion `(n01 + n10) / n2`.
    pub e: f64,
    /// Conditional error proportion `n01 / (n01 + n10)`.
    pub r: Option<f64>,
    /// `n01 / (n01 + n11)`.
    pub qa: Option<f64>,
    /// `n00 / (n10 + n00)`.
    pub qb: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn estimators_from_cells(n00: f64, n01: f64, n10: f64, n11: f64) -> Estimators {
    let n2 = n00 + n01 + n10 + n11;
    Estimators {
        e: if n2 > 0.0 { (n01 + n10) / n2 } else { 0.0 },
        r: ratio(n01, n01 + n10),
        qa: ratio(n01, n01 + n11),
        qb: ratio(n00, n10 + n00),
    }
}

/// Parameters of one Beta posterior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    /// Posterior mode `(alpha - 1) / (alpha + beta - 2)`.
    ///
    /// Returns `None` for the flat posterior (alpha = beta = 1, every value
    /// is a mode) and for parameters below 1 where the density is unbounded
    /// at a boundary.
    pub fn mode(&self) -> Option<f64> {
        if self.alpha < 1.0 || self.beta < 1.0 || self.alpha + self.beta == 2.0 {
            None
        } else {
            Some((self.alpha - 1.0) / (self.alpha + self.beta - 2.0))
        }
    }
}

/// The four Beta posteriors given a table and a `Be(lambda, lambda)` prior:
/// `e ~ Be(n01+n10+l, n00+n11+l)`, `r ~ Be(n01+l, n10+l)`,
/// `q_a ~ Be(n01+l, n11+l)`, `q_b ~ Be(n00+l, n10+l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaPosteriors {
    pub lambda: f64,
    pub e: BetaParams,
    pub r: BetaParams,
    pub qa: BetaParams,
    pub qb: BetaParams,
}

fn posterior_from_cells(
    n00: f64,
    n01: f64,
    n10: f64,
    n11: f64,
    lambda: f64,
) -> Result<BetaPosteriors> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidPrior(lambda));
    }
    Ok(BetaPosteriors {
        lambda,
        e: BetaParams { alpha: n01 + n10 + lambda, beta: n00 + n11 + lambda },
        r: BetaParams { alpha: n01 + lambda, beta: n10 + lambda },
        qa: BetaParams { alpha: n01 + lambda, beta: n11 + lambda },
        qb: BetaParams { alpha: n00 + lambda, beta: n10 + lambda },
    })
}

/// Empirical correlation structure of the ten per-fold disagreement
/// estimators across replications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    /// Inter-group correlation: between the two folds of one split.
    pub rho1: f64,
    /// Intra-group correlation: between folds of different splits.
    pub rho2: f64,
    /// Pooled variance of the per-fold estimators.
    pub sigma2: f64,
}

/// Minimum replications for [`estimate_rho`].
pub const MIN_RHO_REPLICATIONS: usize = 30;

/// Estimates `(rho1, rho2)` from an `R x 5 x 2` array of per-fold
/// disagreement estimates `E_k^(j)` collected over R replications.
///
/// The estimator form: per-position sample variances (divisor R-1) are pooled
/// (averaged) into `sigma2`; `rho1` averages the five within-split
/// covariances `Cov(E_1^(j), E_2^(j)) / sigma2`; `rho2` averages the forty
/// cross-split covariances (ten unordered split pairs, four fold
/// combinations each) divided by `sigma2`.
pub fn estimate_rho(e_values: &[[[f64; 2]; 5]]) -> Result<RhoEstimate> {
    let r = e_values.len();
    if r < MIN_RHO_REPLICATIONS {
        return Err(Error::InsufficientReplications { got: r, min: MIN_RHO_REPLICATIONS });
    }
    let rf = r as f64;

    let mut mean = [[0.0f64; 2]; 5];
    for e in e_values {
        for j in 0..5 {
            for k in 0..2 {
                mean[j][k] += e[j][k];
            }
        }
    }
    for row in &mut mean {
        for m in row {
            *m /= rf;
        }
    }

    // Sample covariance between positions (j1,k1) and (j2,k2).
    let cov = |j1: usize, k1: usize, j2: usize, k2: usize| -> f64 {
        let mut acc = 0.0;
        for e in e_values {
            acc += (e[j1][k1] - mean[j1][k1]) * (e[j2][k2] - mean[j2][k2]);
        }
        acc / (rf - 1.0)
    };

    let mut sigma2 = 0.0;
    for j in 0..5 {
        for k in 0..2 {
            sigma2 += cov(j, k, j, k);
        }
    }
    sigma2 /= 10.0;
    if sigma2 <= 0.0 {
        return Err(Error::ZeroVariance(
            "per-fold disagreement estimates are constant across replications".into(),
        ));
    }

    let mut rho1 = 0.0;
    for j in 0..5 {
        rho1 += cov(j, 0, j, 1);
    }
    rho1 /= 5.0 * sigma2;

    let mut rho2 = 0.0;
    for j1 in 0..5 {
        for j2 in (j1 + 1)..5 {
            for k1 in 0..2 {
                for k2 in 0..2 {
                    rho2 += cov(j1, k1, j2, k2);
                }
            }
        }
    }
    rho2 /= 40.0 * sigma2;

    Ok(RhoEstimate { rho1, rho2, sigma2 })
}

/// Variance of the aggregated 5x2 BCV disagreement estimator:
/// `(1 + rho1 + 8*rho2) * e * (1 - e) / (5n)`.
pub fn variance_e5x2(e: f64, n: usize, rho1: f64, rho2: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&e));
    debug_assert!(n >= 1);
    (1.0 + rho1 + 8.0 * rho2) * e * (1.0 - e) / (5.0 * n as f64)
}
