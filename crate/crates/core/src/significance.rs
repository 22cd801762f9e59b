//! Significance tests comparing two classification algorithms.
//!
//! Three McNemar variants form the core:
//!
//! * [`mcnemar_ho`] — the conventional hold-out test on a single table,
//!   `(|n01 - n10| - 1)^2 / (n01 + n10)` against chi-squared(1);
//! * [`mcnemar_naive_kfold`] — per-fold statistics summed over a K-fold run
//!   against chi-squared(K), a deliberately naive pooling included for
//!   comparison;
//! * [`mcnemar_bcv_general`] / [`mcnemar_bcv_5x2`] — the block-regularized
//!   5x2 cross-validated test: with `t = 10 / (1 + rho1 + 8*rho2)`, the
//!   statistic `t*(|nbar01 - nbar10| - 1/t)^2 / (nbar01 + nbar10)` on the
//!   averaged table is referred to chi-squared(1). The calibrated variant
//!   fixes `rho1 = rho2 = 1/2` (the conservative corner), giving `t = 20/11`
//!   and the closed form `20*(|nbar01 - nbar10| - 11/20)^2 /
//!   (11*(nbar01 + nbar10))`.
//!
//! Alongside them sit standard baselines: the Dietterich 5x2 CV paired t,
//! the K-fold CV paired t, the Alpaydin combined 5x2 CV F, and the
//! two-proportion z test. These carry `"baseline": true` in their metadata.
//!
//! Degenerate inputs are first-class outcomes, not panics: a table with no
//! disagreements cannot be tested and yields a [`TestStatus::NoDisagreement`]
//! result with `reject = false`, which simulations count as non-rejection.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::contingency::{AveragedTable, ContingencyTable};
use crate::dist::RefDist;
use crate::error::{Error, Result};

/// Disagreement-mass threshold below which a BCV statistic is flagged
/// [`TestStatus::LowSupport`].
const LOW_SUPPORT_MASS: f64 = 1.0;

/// Outcome quality of a significance test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestStatus {
    /// Statistic and p-value computed normally.
    Ok,
    /// The table(s) contain no disagreements; nothing to test.
    NoDisagreement,
    /// Computed, but the disagreement mass is below one record per fold;
    /// interpret with caution.
    LowSupport,
    /// Pooled proportion hit 0 or 1; the z statistic is undefined.
    Degenerate,
}

impl TestStatus {
    /// Stable snake_case name used in JSON metadata and console verdicts.
    pub fn as_str(self) -> &'static str {
        match self {
            TestStatus::Ok => "ok",
            TestStatus::NoDisagreement => "no_disagreement",
            TestStatus::LowSupport => "low_support",
            TestStatus::Degenerate => "degenerate",
        }
    }
}

/// Result of one significance test.
#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    /// Canonical test identifier, e.g. `"mcnemar_bcv_5x2"`.
    pub test_name: String,
    /// Observed statistic; `None` when the input is untestable.
    pub statistic: Option<f64>,
    /// Reference distribution the statistic was compared against.
    pub dist: Option<RefDist>,
    /// Upper-tail (or two-sided, per the test's convention) p-value.
    pub p_value: Option<f64>,
    /// Significance level used for the decision.
    pub alpha: f64,
    /// `true` iff the p-value is defined and strictly below `alpha`.
    pub reject: bool,
    /// Outcome quality flag.
    pub status: TestStatus,
    /// Test-specific extras (correlations, fold bookkeeping, ...).
    pub metadata: Map<String, Value>,
}

impl TestResult {
    /// Serializes to the stable JSON shape
    /// `{test_name, statistic, df, p_value, alpha, reject, metadata}`.
    ///
    /// `df` is a number for chi-squared/t, a two-element array for F, and
    /// null for the normal distribution or an untestable input. The status
    /// flag and distribution family ride along inside `metadata`.
    pub fn to_json(&self) -> Value {
        let mut metadata = self.metadata.clone();
        metadata.insert("status".into(), json!(self.status.as_str()));
        if let Some(d) = &self.dist {
            metadata.insert("distribution".into(), json!(d.family()));
        }
        json!({
            "test_name": self.test_name,
            "statistic": self.statistic,
            "df": self.dist.as_ref().map_or(Value::Null, |d| d.df_json()),
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "metadata": metadata,
        })
    }
}

/// Builds a computed result: p-value from the distribution's survival
/// function (doubled for two-sided tests), rejection iff `p < alpha`.
fn computed(
    test_name: &str,
    statistic: f64,
    dist: RefDist,
    alpha: f64,
    two_sided: bool,
    status: TestStatus,
    metadata: Map<String, Value>,
) -> Result<TestResult> {
    let p = if two_sided {
        (2.0 * dist.sf(statistic.abs())?).min(1.0)
    } else {
        dist.sf(statistic)?
    };
    Ok(TestResult {
        test_name: test_name.into(),
        statistic: Some(statistic),
        dist: Some(dist),
        p_value: Some(p),
        alpha,
        reject: p < alpha,
        status,
        metadata,
    })
}

/// Builds an untestable result (no statistic, no rejection).
fn untestable(test_name: &str, alpha: f64, status: TestStatus, metadata: Map<String, Value>) -> TestResult {
    TestResult {
        test_name: test_name.into(),
        statistic: None,
        dist: None,
        p_value: None,
        alpha,
        reject: false,
        status,
        metadata,
    }
}

fn meta(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect()
}

/// Continuity-corrected McNemar term for one table, `(|n01-n10|-1)^2 / m`.
fn corrected_term(n01: f64, n10: f64) -> f64 {
    let m = n01 + n10;
    let d = (n01 - n10).abs() - 1.0;
    d * d / m
}

/// Conventional hold-out McNemar's test on one contingency table.
///
/// `(|n01 - n10| - 1)^2 / (n01 + n10)` against chi-squared(1); the `-1` is
/// the continuity correction. A table without disagreements yields a
/// [`TestStatus::NoDisagreement`] result.
pub fn mcnemar_ho(c: &ContingencyTable, alpha: f64) -> TestResult {
    let metadata = meta(&[("n01", json!(c.n01)), ("n10", json!(c.n10))]);
    if c.n01 + c.n10 == 0 {
        return untestable("mcnemar_ho", alpha, TestStatus::NoDisagreement, metadata);
    }
    let stat = corrected_term(c.n01 as f64, c.n10 as f64);
    computed("mcnemar_ho", stat, RefDist::Chi2 { df: 1 }, alpha, false, TestStatus::Ok, metadata)
        .expect("chi2(1) is valid")
}

/// Naive K-fold CV McNemar's test: per-fold corrected statistics summed and
/// referred to chi-squared(K).
///
/// Folds without disagreements contribute nothing and reduce the degrees of
/// freedom by one each (their indices are recorded in `metadata.skipped_folds`).
/// If every fold is disagreement-free the result is
/// [`TestStatus::NoDisagreement`].
pub fn mcnemar_naive_kfold(tables: &[ContingencyTable], alpha: f64) -> Result<TestResult> {
    let k = tables.len();
    if k < 2 {
        return Err(Error::TooFewFolds { got: k, min: 2 });
    }
    let mut stat = 0.0;
    let mut skipped: Vec<usize> = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        if t.n01 + t.n10 == 0 {
            skipped.push(i);
        } else {
            stat += corrected_term(t.n01 as f64, t.n10 as f64);
        }
    }
    let df = k - skipped.len();
    let metadata = meta(&[
        ("k", json!(k)),
        ("df_effective", json!(df)),
        ("skipped_folds", json!(skipped)),
    ]);
    if df == 0 {
        return Ok(untestable("mcnemar_naive_kfold", alpha, TestStatus::NoDisagreement, metadata));
    }
    computed(
        "mcnemar_naive_kfold",
        stat,
        RefDist::Chi2 { df: df as u64 },
        alpha,
        false,
        TestStatus::Ok,
        metadata,
    )
}

/// General block-regularized 5x2 CV McNemar's test with explicit
/// correlations.
///
/// With `t = 10 / (1 + rho1 + 8*rho2)`, the statistic is
/// `t * (|nbar01 - nbar10| - 1/t)^2 / (nbar01 + nbar10)` against
/// chi-squared(1). The continuity correction `1/t` is kept exactly as
/// written even when it exceeds the cell difference. Requires
/// `1 + rho1 + 8*rho2 > 0`; averaged disagreement mass below one record
/// flags the result [`TestStatus::LowSupport`].
pub fn mcnemar_bcv_general(
    avg: &AveragedTable,
    rho1: f64,
    rho2: f64,
    alpha: f64,
) -> Result<TestResult> {
    let kappa = 1.0 + rho1 + 8.0 * rho2;
    if !(kappa > 0.0) {
        return Err(Error::InvalidRho(kappa));
    }
    let t = 10.0 / kappa;
    let metadata = meta(&[
        ("rho1", json!(rho1)),
        ("rho2", json!(rho2)),
        ("t", json!(t)),
        ("nbar01", json!(avg.nbar01)),
        ("nbar10", json!(avg.nbar10)),
    ]);
    let mass = avg.nbar01 + avg.nbar10;
    if mass == 0.0 {
        return Ok(untestable("mcnemar_bcv_general", alpha, TestStatus::NoDisagreement, metadata));
    }
    let d = (avg.nbar01 - avg.nbar10).abs() - 1.0 / t;
    let stat = t * d * d / mass;
    let status = if mass < LOW_SUPPORT_MASS { TestStatus::LowSupport } else { TestStatus::Ok };
    computed("mcnemar_bcv_general", stat, RefDist::Chi2 { df: 1 }, alpha, false, status, metadata)
}

/// Calibrated 5x2 BCV McNemar's test (`rho1 = rho2 = 1/2`, the conservative
/// corner of the correlation box):
/// `20 * (|nbar01 - nbar10| - 11/20)^2 / (11 * (nbar01 + nbar10))` against
/// chi-squared(1).
pub fn mcnemar_bcv_5x2(avg: &AveragedTable, alpha: f64) -> TestResult {
    let mut result = mcnemar_bcv_general(avg, 0.5, 0.5, alpha)
        .expect("rho1 = rho2 = 1/2 always yields a positive compression factor");
    result.test_name = "mcnemar_bcv_5x2".into();
    result
}

/// Per-replication variance terms `s_j^2 = (d_j1 - dbar_j)^2 + (d_j2 - dbar_j)^2`.
fn split_variances(diffs: &[[f64; 2]; 5]) -> [f64; 5] {
    let mut s2 = [0.0; 5];
    for (j, d) in diffs.iter().enumerate() {
        let mean = (d[0] + d[1]) / 2.0;
        s2[j] = (d[0] - mean).powi(2) + (d[1] - mean).powi(2);
    }
    s2
}

/// Dietterich's 5x2 CV paired t-test (baseline).
///
/// `t = d_11 / sqrt(mean of the five two-fold variance estimates)` against
/// Student's t with 5 degrees of freedom, two-sided. Errors when every
/// variance term is zero.
pub fn paired_t_5x2cv(diffs: &[[f64; 2]; 5], alpha: f64) -> Result<TestResult> {
    let s2 = split_variances(diffs);
    let denom = s2.iter().sum::<f64>() / 5.0;
    if denom <= 0.0 {
        return Err(Error::ZeroVariance("all ten fold differences are split-wise constant".into()));
    }
    let stat = diffs[0][0] / denom.sqrt();
    let metadata = meta(&[("baseline", json!(true)), ("s2", json!(s2.to_vec()))]);
    computed(
        "paired_t_5x2cv",
        stat,
        RefDist::StudentT { df: 5 },
        alpha,
        true,
        TestStatus::Ok,
        metadata,
    )
}

/// K-fold CV paired t-test (baseline): `t = mean / (sd / sqrt(K))` against
/// Student's t with K-1 degrees of freedom, two-sided.
pub fn paired_t_kfold(diffs: &[f64], alpha: f64) -> Result<TestResult> {
    let k = diffs.len();
    if k < 2 {
        return Err(Error::TooFewFolds { got: k, min: 2 });
    }
    let kf = k as f64;
    let mean = diffs.iter().sum::<f64>() / kf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (kf - 1.0);
    // Identical diffs can leave var a hair above zero through summation
    // round-off; catch them exactly rather than report a huge statistic.
    if var <= 0.0 || diffs.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::ZeroVariance("fold differences are identical".into()));
    }
    let stat = mean / (var / kf).sqrt();
    let metadata = meta(&[("baseline", json!(true)), ("k", json!(k)), ("mean_diff", json!(mean))]);
    computed(
        "paired_t_kfold",
        stat,
        RefDist::StudentT { df: k as u64 - 1 },
        alpha,
        true,
        TestStatus::Ok,
        metadata,
    )
}

/// Alpaydin's combined 5x2 CV F-test (baseline):
/// `F = sum of the ten squared differences / (2 * sum of the five variance
/// terms)` against F(10, 5).
pub fn combined_f_5x2cv(diffs: &[[f64; 2]; 5], alpha: f64) -> Result<TestResult> {
    let s2 = split_variances(diffs);
    let denom = 2.0 * s2.iter().sum::<f64>();
    if denom <= 0.0 {
        return Err(Error::ZeroVariance("all ten fold differences are split-wise constant".into()));
    }
    let num: f64 = diffs.iter().flatten().map(|d| d * d).sum();
    let stat = num / denom;
    let metadata = meta(&[("baseline", json!(true))]);
    computed(
        "combined_f_5x2cv",
        stat,
        RefDist::F { df1: 10, df2: 5 },
        alpha,
        false,
        TestStatus::Ok,
        metadata,
    )
}

/// Two-proportion z test on a shared validation set (baseline).
///
/// `z = (p_a - p_b) / sqrt(2 * p * (1 - p) / n2)` with `p` the pooled error
/// proportion, two-sided normal decision. A pooled proportion of exactly 0
/// or 1 gives a [`TestStatus::Degenerate`] result (nothing to test).
pub fn proportional_z(err_a: u64, err_b: u64, n2: u64, alpha: f64) -> Result<TestResult> {
    if n2 == 0 {
        return Err(Error::DatasetTooSmall { n: 0, min: 1 });
    }
    if err_a > n2 || err_b > n2 {
        return Err(Error::InvalidConfig(format!(
            "error counts ({err_a}, {err_b}) exceed validation size {n2}"
        )));
    }
    let n = n2 as f64;
    let p_a = err_a as f64 / n;
    let p_b = err_b as f64 / n;
    let pooled = (err_a + err_b) as f64 / (2.0 * n);
    let metadata = meta(&[
        ("baseline", json!(true)),
        ("err_a", json!(err_a)),
        ("err_b", json!(err_b)),
        ("n2", json!(n2)),
        ("p_pooled", json!(pooled)),
    ]);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(untestable("proportional_z", alpha, TestStatus::Degenerate, metadata));
    }
    let stat = (p_a - p_b) / (2.0 * pooled * (1.0 - pooled) / n).sqrt();
    computed("proportional_z", stat, RefDist::Normal, alpha, true, TestStatus::Ok, metadata)
}
