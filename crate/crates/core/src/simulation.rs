//! Deterministic Monte Carlo studies of significance-test size and power.
//!
//! The harness turns a [`ScenarioConfig`] into rejection-rate estimates:
//! every replication draws a fresh dataset (or pair of loss vectors), runs
//! each configured test on its own resampling scheme, and records a reject
//! flag. Sweeping a metric weight (`omega`), a class separation (`delta`),
//! or a calibration target (`lambda`) produces power curves; a fixed
//! null-true configuration estimates type I error.
//!
//! Three properties are load-bearing and tested:
//!
//! * **Determinism.** Every random draw is seeded from a
//!   `(master_seed, stream, replication)` triple via [`crate::rng`],
//!   replications are collected in index order, and no wall-clock data
//!   enters a report, so two runs of the same config produce byte-identical
//!   CSV and JSON regardless of the rayon worker count.
//! * **Common random numbers.** Sweep points reuse the same
//!   per-replication dataset and partition seeds, so a curve differs across
//!   its points only through the swept parameter, never through fresh
//!   resampling noise.
//! * **Per-test schemes.** Within one replication the hold-out tests see a
//!   2/3 : 1/3 split, the K-fold tests a 10-fold partition, and the 5x2
//!   family a block-regularized 5x2 partition, each drawn from its own
//!   seed stream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{fit, ClassifierSpec, FittedModel};
use crate::contingency::{
    average_table, estimate_rho, table_from_losses, table_from_predictions, ContingencyTable,
    RhoEstimate, MIN_RHO_REPLICATIONS,
};
use crate::datagen::{
    epsilon_losses, exp6_population, exp6_sample, exp6_sample_without_replacement, simple_sample,
    EpsilonConfig, Exp6Config, SimpleConfig,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::partition::{bcv_5x2_partitions_n, kfold_partitions_n, split_holdout_n};
use crate::rng::{derive_seed, derive_seed2, Stream};
use crate::significance::{
    combined_f_5x2cv, mcnemar_bcv_5x2, mcnemar_bcv_general, mcnemar_ho, mcnemar_naive_kfold,
    paired_t_5x2cv, paired_t_kfold, proportional_z, TestResult, TestStatus,
};

/// Training share of the hold-out split (the conventional 2/3 : 1/3).
pub const HOLDOUT_TRAIN_FRACTION: f64 = 2.0 / 3.0;

/// Fold count used by the K-fold resampling scheme.
pub const KFOLD_K: usize = 10;

/// Default replication count for the cheap generators (epsilon, simple).
pub const DEFAULT_REPLICATIONS: usize = 1000;

/// Default replication count for EXP6 scenarios, where every replication
/// fits learners on all 21 training folds; a reduced count keeps a full
/// study tractable on one core at a Monte Carlo SE of about 0.015.
pub const DEFAULT_REPLICATIONS_EXP6: usize = 200;

/// Default weight grid for metric calibration; must end at 1.0, the
/// plain-Euclidean anchor of the interpolation target.
pub const DEFAULT_OMEGA_GRID: [f64; 8] = [0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0];

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

/// Synthetic data source of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Paired one-zero loss vectors with a shared marginal error rate;
    /// no features and no classifiers (loss-vector mode).
    Epsilon,
    /// Six-class grid problem with two continuous predictors.
    Exp6,
    /// One-dimensional two-class Gaussian location problem.
    Simple,
}

impl GeneratorKind {
    /// Stable lowercase name used in CSV output and CLI flags.
    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorKind::Epsilon => "epsilon",
            GeneratorKind::Exp6 => "exp6",
            GeneratorKind::Simple => "simple",
        }
    }
}

impl std::fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon" => Ok(GeneratorKind::Epsilon),
            "exp6" => Ok(GeneratorKind::Exp6),
            "simple" => Ok(GeneratorKind::Simple),
            other => Err(Error::InvalidConfig(format!("unknown generator {other:?}"))),
        }
    }
}

/// One of the eight supported significance tests.
///
/// Config validation rejects anything else, so a scenario can only contain
/// tests this crate actually implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestName {
    #[serde(rename = "mcnemar_ho")]
    McnemarHo,
    #[serde(rename = "mcnemar_naive_kfold")]
    McnemarNaiveKfold,
    #[serde(rename = "mcnemar_bcv_5x2")]
    McnemarBcv5x2,
    #[serde(rename = "mcnemar_bcv_general")]
    McnemarBcvGeneral,
    #[serde(rename = "paired_t_5x2cv")]
    PairedT5x2cv,
    #[serde(rename = "paired_t_kfold")]
    PairedTKfold,
    #[serde(rename = "combined_f_5x2cv")]
    CombinedF5x2cv,
    #[serde(rename = "proportional_z")]
    ProportionalZ,
}

/// Resampling scheme a test consumes within a replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scheme {
    Holdout,
    Kfold,
    Bcv,
}

impl TestName {
    /// All supported tests, in reporting order.
    pub const ALL: [TestName; 8] = [
        TestName::McnemarHo,
        TestName::McnemarNaiveKfold,
        TestName::McnemarBcv5x2,
        TestName::McnemarBcvGeneral,
        TestName::PairedT5x2cv,
        TestName::PairedTKfold,
        TestName::CombinedF5x2cv,
        TestName::ProportionalZ,
    ];

    /// Stable snake_case name used in configs, CSV, and the CLI.
    pub fn as_str(&self) -> &'static str {
        match self {
            TestName::McnemarHo => "mcnemar_ho",
            TestName::McnemarNaiveKfold => "mcnemar_naive_kfold",
            TestName::McnemarBcv5x2 => "mcnemar_bcv_5x2",
            TestName::McnemarBcvGeneral => "mcnemar_bcv_general",
            TestName::PairedT5x2cv => "paired_t_5x2cv",
            TestName::PairedTKfold => "paired_t_kfold",
            TestName::CombinedF5x2cv => "combined_f_5x2cv",
            TestName::ProportionalZ => "proportional_z",
        }
    }

    fn scheme(&self) -> Scheme {
        match self {
            TestName::McnemarHo | TestName::ProportionalZ => Scheme::Holdout,
            TestName::McnemarNaiveKfold | TestName::PairedTKfold => Scheme::Kfold,
            TestName::McnemarBcv5x2
            | TestName::McnemarBcvGeneral
            | TestName::PairedT5x2cv
            | TestName::CombinedF5x2cv => Scheme::Bcv,
        }
    }
}

impl std::fmt::Display for TestName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TestName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown test name {s:?}")))
    }
}

/// Parameter grid swept by a scenario.
///
/// In JSON configs this is adjacently tagged:
/// `{"parameter": "omega", "values": [0.29, 0.5, 1.0]}`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "parameter", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    /// Single fixed configuration (one sweep point, no parameter).
    #[default]
    None,
    /// Metric weight of the `fnn_weighted` algorithm (EXP6 power curves).
    Omega(Vec<f64>),
    /// Class separation of the simple generator (simple power curves).
    Delta(Vec<f64>),
    /// Calibration targets: each lambda is mapped to an omega whose true
    /// error interpolates between the reference algorithm (lambda = 0) and
    /// plain Euclidean distance (lambda = 1) before the sweep runs.
    Lambda(Vec<f64>),
}

impl Sweep {
    fn values(&self) -> Option<&[f64]> {
        match self {
            Sweep::None => None,
            Sweep::Omega(v) | Sweep::Delta(v) | Sweep::Lambda(v) => Some(v),
        }
    }

    fn parameter(&self) -> Option<&'static str> {
        match self {
            Sweep::None => None,
            Sweep::Omega(_) => Some("omega"),
            Sweep::Delta(_) => Some("delta"),
            Sweep::Lambda(_) => Some("lambda"),
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_rho() -> f64 {
    0.5
}

fn default_calibration_replications() -> usize {
    100
}

/// Full description of one Monte Carlo study.
///
/// Loaded from JSON by the CLI (`deny_unknown_fields` catches typos) or
/// built in code. `validate` checks every cross-field constraint before a
/// run starts, so replication workers only see well-formed configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Data source.
    pub generator: GeneratorKind,
    /// First algorithm; `None` only in loss-vector (epsilon) mode.
    #[serde(default)]
    pub algo_a: Option<ClassifierSpec>,
    /// Second algorithm; `None` only in loss-vector (epsilon) mode.
    #[serde(default)]
    pub algo_b: Option<ClassifierSpec>,
    /// Records per replication dataset.
    pub n: usize,
    /// Tests to run each replication, in reporting order.
    pub tests: Vec<TestName>,
    /// Monte Carlo replications per sweep point. Rates carry a binomial
    /// SE of `sqrt(p(1-p)/replications)`; 100 or more keeps that SE below
    /// about 0.05 at the scales studied here.
    pub replications: usize,
    /// Significance level shared by every test.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Root of all seed derivations; equal seeds mean equal reports.
    #[serde(default)]
    pub master_seed: u64,
    /// Marginal error rate of the epsilon generator.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Class separation of the simple generator when `sweep` does not
    /// override it (0.0 makes the null hypothesis true).
    #[serde(default)]
    pub delta: f64,
    /// Within-split correlation assumed by `mcnemar_bcv_general`.
    #[serde(default = "default_rho")]
    pub rho1: f64,
    /// Between-split correlation assumed by `mcnemar_bcv_general`.
    #[serde(default = "default_rho")]
    pub rho2: f64,
    /// Parameter grid.
    #[serde(default)]
    pub sweep: Sweep,
    /// Training replications behind each lambda-to-omega calibration.
    #[serde(default = "default_calibration_replications")]
    pub calibration_replications: usize,
}

impl ScenarioConfig {
    /// Checks every cross-field constraint; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::InvalidConfig("tests must name at least one test".into()));
        }
        for (i, t) in self.tests.iter().enumerate() {
            if self.tests[..i].contains(t) {
                return Err(Error::InvalidConfig(format!("duplicate test {t}")));
            }
        }
        let min_n = self
            .tests
            .iter()
            .map(|t| match t.scheme() {
                Scheme::Holdout => 3,
                Scheme::Kfold => KFOLD_K,
                Scheme::Bcv => 8,
            })
            .max()
            .expect("tests nonempty");
        if self.n < min_n {
            return Err(Error::InvalidConfig(format!(
                "n = {} is too small for the configured resampling schemes (need >= {min_n})",
                self.n
            )));
        }
        match self.generator {
            GeneratorKind::Epsilon => {
                if self.algo_a.is_some() || self.algo_b.is_some() {
                    return Err(Error::InvalidConfig(
                        "the epsilon generator runs in loss-vector mode; omit algo_a and algo_b"
                            .into(),
                    ));
                }
                EpsilonConfig { n: self.n, epsilon: self.epsilon }.validate()?;
            }
            GeneratorKind::Exp6 | GeneratorKind::Simple => {
                let (Some(a), Some(b)) = (&self.algo_a, &self.algo_b) else {
                    return Err(Error::InvalidConfig(
                        "feature generators need both algo_a and algo_b".into(),
                    ));
                };
                for spec in [a, b] {
                    spec.validate()?;
                    self.check_algo(spec)?;
                }
                if a == b {
                    return Err(Error::InvalidConfig(
                        "algo_a and algo_b are identical and can never disagree".into(),
                    ));
                }
                if self.generator == GeneratorKind::Simple {
                    SimpleConfig { n: self.n, delta: self.delta }.validate()?;
                }
            }
        }
        if self.tests.contains(&TestName::McnemarBcvGeneral) {
            let kappa = 1.0 + self.rho1 + 8.0 * self.rho2;
            if !(kappa > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "mcnemar_bcv_general needs 1 + rho1 + 8*rho2 > 0, got {kappa}"
                )));
            }
        }
        self.validate_sweep()
    }

    /// Rejects algorithms that cannot run on the generator's feature space.
    fn check_algo(&self, spec: &ClassifierSpec) -> Result<()> {
        let bad = match (self.generator, spec) {
            (GeneratorKind::Simple, ClassifierSpec::FnnWeighted { .. }) => {
                Some("fnn_weighted needs 2 features; the simple generator has 1")
            }
            (_, ClassifierSpec::FnnDistorted { .. }) => {
                Some("fnn_distorted needs 16 features; no synthetic generator has them")
            }
            (GeneratorKind::Exp6, ClassifierSpec::Logreg) => {
                Some("logreg is binary; the exp6 generator has six classes")
            }
            _ => None,
        };
        match bad {
            Some(msg) => Err(Error::InvalidConfig(msg.into())),
            None => Ok(()),
        }
    }

    fn validate_sweep(&self) -> Result<()> {
        if let Some(values) = self.sweep.values() {
            if values.is_empty() {
                return Err(Error::InvalidConfig("sweep values must be nonempty".into()));
            }
        }
        match &self.sweep {
            Sweep::None => Ok(()),
            Sweep::Omega(values) => {
                self.require_one_fnn("an omega sweep")?;
                for &v in values {
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(Error::InvalidConfig(format!(
                            "omega sweep value {v} outside (0, 1]"
                        )));
                    }
                }
                Ok(())
            }
            Sweep::Delta(values) => {
                if self.generator != GeneratorKind::Simple {
                    return Err(Error::InvalidConfig(
                        "a delta sweep needs the simple generator".into(),
                    ));
                }
                for &v in values {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::InvalidConfig(format!(
                            "delta sweep value {v} outside [0, 1]"
                        )));
                    }
                }
                Ok(())
            }
            Sweep::Lambda(values) => {
                if self.generator != GeneratorKind::Exp6 {
                    return Err(Error::InvalidConfig(
                        "a lambda sweep calibrates against the exp6 population and needs the \
                         exp6 generator"
                            .into(),
                    ));
                }
                self.require_one_fnn("a lambda sweep")?;
                for &v in values {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::InvalidConfig(format!(
                            "lambda sweep value {v} outside [0, 1]"
                        )));
                    }
                }
                if self.calibration_replications == 0 {
                    return Err(Error::InvalidConfig(
                        "calibration_replications must be >= 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The swept algorithm of omega/lambda sweeps: exactly one side must be
    /// `fnn_weighted`, the other is left untouched (and anchors lambda
    /// calibration).
    fn require_one_fnn(&self, what: &str) -> Result<()> {
        let fnn = |s: &Option<ClassifierSpec>| {
            matches!(s, Some(ClassifierSpec::FnnWeighted { .. }))
        };
        match (fnn(&self.algo_a), fnn(&self.algo_b)) {
            (true, false) | (false, true) => Ok(()),
            _ => Err(Error::InvalidConfig(format!(
                "{what} needs exactly one fnn_weighted algorithm"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Replications
// ---------------------------------------------------------------------------

/// Reject/degenerate flags of one test in one replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestOutcome {
    pub test: TestName,
    /// True when the test rejected the null at the configured alpha.
    pub reject: bool,
    /// True when no decision was possible (no disagreements anywhere, or a
    /// zero-variance paired statistic); degenerate replications count as
    /// non-rejections.
    pub degenerate: bool,
}

/// One sweep point with its parameter substituted into the scenario.
#[derive(Clone, Debug)]
struct ResolvedPoint {
    sweep_parameter: Option<&'static str>,
    sweep_value: Option<f64>,
    /// Omega backing a lambda point (reported for reproducibility).
    resolved_omega: Option<f64>,
    algo_a: Option<ClassifierSpec>,
    algo_b: Option<ClassifierSpec>,
    delta: f64,
}

/// Replication data: either paired loss vectors or a feature dataset.
enum RepData {
    Losses(Vec<bool>, Vec<bool>),
    Features(Dataset),
}

/// Per-scheme contingency tables of one replication; a scheme is `None`
/// when no configured test consumes it.
struct SchemeTables {
    ho: Option<ContingencyTable>,
    kfold: Option<Vec<ContingencyTable>>,
    bcv: Option<Vec<ContingencyTable>>,
}

/// Runs one test on its scheme's tables. Panics only if the scheme was not
/// precomputed, which the callers guarantee.
fn dispatch_test(
    test: TestName,
    tables: &SchemeTables,
    alpha: f64,
    rho1: f64,
    rho2: f64,
) -> Result<TestResult> {
    match test {
        TestName::McnemarHo => {
            Ok(mcnemar_ho(tables.ho.as_ref().expect("holdout precomputed"), alpha))
        }
        TestName::ProportionalZ => {
            let t = tables.ho.as_ref().expect("holdout precomputed");
            proportional_z(t.n00 + t.n01, t.n00 + t.n10, t.n2(), alpha)
        }
        TestName::McnemarNaiveKfold => {
            mcnemar_naive_kfold(tables.kfold.as_ref().expect("kfold precomputed"), alpha)
        }
        TestName::PairedTKfold => {
            let diffs: Vec<f64> = tables
                .kfold
                .as_ref()
                .expect("kfold precomputed")
                .iter()
                .map(error_rate_diff)
                .collect();
            paired_t_kfold(&diffs, alpha)
        }
        TestName::McnemarBcv5x2 => {
            let avg = average_table(tables.bcv.as_ref().expect("bcv precomputed"))?;
            Ok(mcnemar_bcv_5x2(&avg, alpha))
        }
        TestName::McnemarBcvGeneral => {
            let avg = average_table(tables.bcv.as_ref().expect("bcv precomputed"))?;
            mcnemar_bcv_general(&avg, rho1, rho2, alpha)
        }
        TestName::PairedT5x2cv => {
            paired_t_5x2cv(&bcv_diffs(tables.bcv.as_ref().expect("bcv precomputed")), alpha)
        }
        TestName::CombinedF5x2cv => {
            combined_f_5x2cv(&bcv_diffs(tables.bcv.as_ref().expect("bcv precomputed")), alpha)
        }
    }
}

fn with_omega(spec: &ClassifierSpec, omega: f64) -> ClassifierSpec {
    match spec {
        ClassifierSpec::FnnWeighted { .. } => ClassifierSpec::FnnWeighted { omega },
        other => *other,
    }
}

/// Substitutes a direct sweep value (omega or delta) into the config.
fn resolve_direct(cfg: &ScenarioConfig, value: Option<f64>) -> Result<ResolvedPoint> {
    let base = ResolvedPoint {
        sweep_parameter: cfg.sweep.parameter(),
        sweep_value: value,
        resolved_omega: None,
        algo_a: cfg.algo_a,
        algo_b: cfg.algo_b,
        delta: cfg.delta,
    };
    match (&cfg.sweep, value) {
        (Sweep::None, None) => Ok(base),
        (Sweep::Omega(_), Some(omega)) => Ok(ResolvedPoint {
            algo_a: cfg.algo_a.as_ref().map(|s| with_omega(s, omega)),
            algo_b: cfg.algo_b.as_ref().map(|s| with_omega(s, omega)),
            ..base
        }),
        (Sweep::Delta(_), Some(delta)) => Ok(ResolvedPoint { delta, ..base }),
        (Sweep::Lambda(_), _) => Err(Error::InvalidConfig(
            "lambda sweeps need calibration; use run_scenario".into(),
        )),
        (Sweep::None, Some(_)) => Err(Error::InvalidConfig(
            "sweep_value given but the scenario sweeps nothing".into(),
        )),
        (_, None) => Err(Error::InvalidConfig("sweep configured but no sweep_value given".into())),
    }
}

/// Runs one replication and returns per-test outcomes in `cfg.tests` order.
///
/// `sweep_value` is interpreted according to `cfg.sweep` (an omega or a
/// delta; pass `None` for unswept scenarios). Lambda sweeps resolve their
/// omega during [`run_scenario`] and cannot be driven through this entry
/// point. The result is fully determined by `(cfg, sweep_value,
/// replication)`.
pub fn run_replication(
    cfg: &ScenarioConfig,
    sweep_value: Option<f64>,
    replication: u64,
) -> Result<Vec<TestOutcome>> {
    cfg.validate()?;
    let point = resolve_direct(cfg, sweep_value)?;
    run_replication_resolved(cfg, &point, replication)
}

fn run_replication_resolved(
    cfg: &ScenarioConfig,
    point: &ResolvedPoint,
    replication: u64,
) -> Result<Vec<TestOutcome>> {
    let data = draw_data(cfg, point, replication)?;

    let needs = |s: Scheme| cfg.tests.iter().any(|t| t.scheme() == s);
    let ho = if needs(Scheme::Holdout) {
        let seed = derive_seed(cfg.master_seed, Stream::HoldoutSplit, replication);
        let pair = split_holdout_n(cfg.n, HOLDOUT_TRAIN_FRACTION, seed)?;
        Some(eval_split(cfg, point, &data, &pair.train, &pair.valid, replication, 0)?)
    } else {
        None
    };
    let kfold = if needs(Scheme::Kfold) {
        let seed = derive_seed(cfg.master_seed, Stream::KfoldSplit, replication);
        let pairs = kfold_partitions_n(cfg.n, KFOLD_K, seed)?;
        let tables = pairs
            .iter()
            .enumerate()
            .map(|(k, p)| eval_split(cfg, point, &data, &p.train, &p.valid, replication, 2 + 2 * k))
            .collect::<Result<Vec<_>>>()?;
        Some(tables)
    } else {
        None
    };
    let bcv = if needs(Scheme::Bcv) {
        let seed = derive_seed(cfg.master_seed, Stream::BcvSplit, replication);
        let partition = bcv_5x2_partitions_n(cfg.n, seed)?;
        let tables = partition
            .folds()
            .enumerate()
            .map(|(f, (train, valid))| {
                eval_split(cfg, point, &data, train, valid, replication, 2 + 2 * KFOLD_K + 2 * f)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(tables)
    } else {
        None
    };

    let tables = SchemeTables { ho, kfold, bcv };
    cfg.tests
        .iter()
        .map(|&test| {
            outcome_of(test, dispatch_test(test, &tables, cfg.alpha, cfg.rho1, cfg.rho2))
        })
        .collect()
}

/// Draws the replication's data from the `Dataset` seed stream. The seed
/// depends only on `(master_seed, replication)`, never on the sweep point,
/// which is what makes sweep curves common-random-number comparisons.
fn draw_data(
    cfg: &ScenarioConfig,
    point: &ResolvedPoint,
    replication: u64,
) -> Result<RepData> {
    let seed = derive_seed(cfg.master_seed, Stream::Dataset, replication);
    match cfg.generator {
        GeneratorKind::Epsilon => {
            let (a, b) = epsilon_losses(&EpsilonConfig { n: cfg.n, epsilon: cfg.epsilon }, seed)?;
            Ok(RepData::Losses(a, b))
        }
        GeneratorKind::Exp6 => {
            Ok(RepData::Features(exp6_sample(&Exp6Config { n: cfg.n }, seed)?))
        }
        GeneratorKind::Simple => Ok(RepData::Features(simple_sample(
            &SimpleConfig { n: cfg.n, delta: point.delta },
            seed,
        )?)),
    }
}

/// Evaluates one (train, valid) split into a contingency table.
///
/// `slot` spaces the per-fold fit seeds inside the replication; current
/// learners are deterministic, so it only future-proofs the derivation.
fn eval_split(
    cfg: &ScenarioConfig,
    point: &ResolvedPoint,
    data: &RepData,
    train: &[usize],
    valid: &[usize],
    replication: u64,
    slot: usize,
) -> Result<ContingencyTable> {
    match data {
        RepData::Losses(loss_a, loss_b) => {
            let a: Vec<bool> = valid.iter().map(|&i| loss_a[i]).collect();
            let b: Vec<bool> = valid.iter().map(|&i| loss_b[i]).collect();
            table_from_losses(&a, &b)
        }
        RepData::Features(dataset) => {
            // The specs come from the resolved point, not the raw config:
            // omega and lambda sweeps substitute the swept hyperparameter
            // there, and the raw config still carries the placeholder.
            let spec_a = point.algo_a.as_ref().expect("validated feature config");
            let spec_b = point.algo_b.as_ref().expect("validated feature config");
            predictions_table(dataset, spec_a, spec_b, train, valid, cfg.master_seed, replication, slot)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn predictions_table(
    dataset: &Dataset,
    spec_a: &ClassifierSpec,
    spec_b: &ClassifierSpec,
    train: &[usize],
    valid: &[usize],
    master_seed: u64,
    replication: u64,
    slot: usize,
) -> Result<ContingencyTable> {
    let train_set = dataset.subset(train);
    let valid_set = dataset.subset(valid);
    let model_a = fit(
        *spec_a,
        &train_set,
        derive_seed2(master_seed, Stream::Fit, replication, slot as u64),
    )?;
    let model_b = fit(
        *spec_b,
        &train_set,
        derive_seed2(master_seed, Stream::Fit, replication, slot as u64 + 1),
    )?;
    let pred_a = model_a.predict_dataset(&valid_set)?;
    let pred_b = model_b.predict_dataset(&valid_set)?;
    table_from_predictions(valid_set.labels(), &pred_a, &pred_b)
}

/// Per-fold error-rate difference `err_A - err_B` read off a table.
fn error_rate_diff(t: &ContingencyTable) -> f64 {
    (t.n01 as f64 - t.n10 as f64) / t.n2() as f64
}

/// Reshapes the ten round-robin fold tables into the 5x2 difference array.
fn bcv_diffs(tables: &[ContingencyTable]) -> [[f64; 2]; 5] {
    let mut diffs = [[0.0; 2]; 5];
    for (f, t) in tables.iter().enumerate() {
        diffs[f / 2][f % 2] = error_rate_diff(t);
    }
    diffs
}

/// Maps a test invocation onto reject/degenerate flags.
///
/// Zero-variance paired statistics are a property of the drawn data, not a
/// configuration mistake, so they become degenerate non-rejections instead
/// of aborting the study; anything else propagates.
fn outcome_of(test: TestName, result: Result<TestResult>) -> Result<TestOutcome> {
    match result {
        Ok(r) => Ok(TestOutcome {
            test,
            reject: r.reject,
            degenerate: matches!(r.status, TestStatus::NoDisagreement | TestStatus::Degenerate),
        }),
        Err(Error::ZeroVariance(_)) => Ok(TestOutcome { test, reject: false, degenerate: true }),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// Single-dataset comparisons
// ---------------------------------------------------------------------------

/// One test's full outcome on a fixed dataset.
#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub test: TestName,
    /// `None` when the drawn resampling produced an untestable statistic
    /// (see `note`); every other error aborts the comparison instead.
    pub result: Option<TestResult>,
    /// Reason the test produced no result.
    pub note: Option<String>,
}

/// Runs the chosen tests once on a user-supplied dataset.
///
/// This is the library entry behind the CLI's `test` subcommand: each test
/// consumes its own resampling scheme (hold-out, 10-fold, or 5x2), all
/// drawn from `master_seed` exactly like replication 0 of a scenario, so
/// identical invocations give identical results. `rho1`/`rho2` only feed
/// `mcnemar_bcv_general`. Zero-variance paired statistics become a `note`
/// on their row rather than an error: on one fixed dataset that outcome is
/// an answer ("these algorithms never differ here"), not a failure.
#[allow(clippy::too_many_arguments)]
pub fn compare_on_dataset(
    data: &Dataset,
    algo_a: &ClassifierSpec,
    algo_b: &ClassifierSpec,
    tests: &[TestName],
    alpha: f64,
    rho1: f64,
    rho2: f64,
    master_seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if tests.is_empty() {
        return Err(Error::InvalidConfig("tests must name at least one test".into()));
    }
    for (i, t) in tests.iter().enumerate() {
        if tests[..i].contains(t) {
            return Err(Error::InvalidConfig(format!("duplicate test {t}")));
        }
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    algo_a.validate()?;
    algo_b.validate()?;
    if tests.contains(&TestName::McnemarBcvGeneral) {
        let kappa = 1.0 + rho1 + 8.0 * rho2;
        if !(kappa > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mcnemar_bcv_general needs 1 + rho1 + 8*rho2 > 0, got {kappa}"
            )));
        }
    }

    let n = data.n();
    let needs = |s: Scheme| tests.iter().any(|t| t.scheme() == s);
    let eval = |train: &[usize], valid: &[usize], slot: usize| {
        predictions_table(data, algo_a, algo_b, train, valid, master_seed, 0, slot)
    };
    let ho = if needs(Scheme::Holdout) {
        let pair = split_holdout_n(
            n,
            HOLDOUT_TRAIN_FRACTION,
            derive_seed(master_seed, Stream::HoldoutSplit, 0),
        )?;
        Some(eval(&pair.train, &pair.valid, 0)?)
    } else {
        None
    };
    let kfold = if needs(Scheme::Kfold) {
        let pairs =
            kfold_partitions_n(n, KFOLD_K, derive_seed(master_seed, Stream::KfoldSplit, 0))?;
        let tables = pairs
            .iter()
            .enumerate()
            .map(|(k, p)| eval(&p.train, &p.valid, 2 + 2 * k))
            .collect::<Result<Vec<_>>>()?;
        Some(tables)
    } else {
        None
    };
    let bcv = if needs(Scheme::Bcv) {
        let partition = bcv_5x2_partitions_n(n, derive_seed(master_seed, Stream::BcvSplit, 0))?;
        let tables = partition
            .folds()
            .enumerate()
            .map(|(f, (train, valid))| eval(train, valid, 2 + 2 * KFOLD_K + 2 * f))
            .collect::<Result<Vec<_>>>()?;
        Some(tables)
    } else {
        None
    };
    let tables = SchemeTables { ho, kfold, bcv };

    tests
        .iter()
        .map(|&test| match dispatch_test(test, &tables, alpha, rho1, rho2) {
            Ok(result) => Ok(ComparisonRow { test, result: Some(result), note: None }),
            Err(Error::ZeroVariance(msg)) => {
                Ok(ComparisonRow { test, result: None, note: Some(msg) })
            }
            Err(e) => Err(e),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Scenario reports
// ---------------------------------------------------------------------------

/// Rejection-rate estimate of one test at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub test: TestName,
    /// Swept parameter name (`omega`, `delta`, or `lambda`); `None` when
    /// the scenario has a single fixed point.
    pub sweep_parameter: Option<String>,
    pub sweep_value: Option<f64>,
    /// Omega materialized from a lambda target, for reproducibility.
    pub resolved_omega: Option<f64>,
    pub rejections: u64,
    /// Replications that could not decide (all-zero disagreements or a
    /// zero-variance statistic); included in `replications` as
    /// non-rejections.
    pub degenerate: u64,
    pub replications: u64,
    pub rejection_rate: f64,
    /// Binomial Monte Carlo standard error of `rejection_rate`.
    pub se: f64,
}

/// Full study output: provenance plus one row per (sweep point, test).
///
/// Reports are deliberately wall-clock-free: with equal configs two runs
/// serialize byte-identically, which the tests rely on. Timing belongs to
/// the console, not the artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// SHA-256 of the canonical JSON of the scenario config.
    pub config_hash: String,
    pub master_seed: u64,
    pub generator: GeneratorKind,
    pub alpha: f64,
    pub rows: Vec<ReportRow>,
}

impl SimulationReport {
    /// Plot-ready CSV, one row per (sweep point, test).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "test,sweep_parameter,sweep_value,resolved_omega,rejections,degenerate,replications,rejection_rate,se\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:.6},{:.6}\n",
                row.test,
                row.sweep_parameter.as_deref().unwrap_or(""),
                fmt_opt(row.sweep_value),
                fmt_opt(row.resolved_omega),
                row.rejections,
                row.degenerate,
                row.replications,
                row.rejection_rate,
                row.se,
            ));
        }
        out
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn config_hash(cfg: &ScenarioConfig) -> String {
    sha256_hex(serde_json::to_string(cfg).expect("config serializes").as_bytes())
}

/// Runs the full study: every sweep point, every replication, every test.
///
/// Replications are independent rayon work items; results are collected in
/// replication order and reduced by counting, so the report is identical
/// for any worker count. Lambda sweeps first build one calibration curve
/// (shared by all targets), then run like omega sweeps.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let points: Vec<ResolvedPoint> = match &cfg.sweep {
        Sweep::None => vec![resolve_direct(cfg, None)?],
        Sweep::Omega(values) | Sweep::Delta(values) => values
            .iter()
            .map(|&v| resolve_direct(cfg, Some(v)))
            .collect::<Result<_>>()?,
        Sweep::Lambda(values) => {
            let curve = calibration_curve(&calibration_config(cfg)?)?;
            values
                .iter()
                .map(|&lambda| {
                    let omega = interpolate_omega(&curve, lambda)?;
                    Ok(ResolvedPoint {
                        sweep_parameter: Some("lambda"),
                        sweep_value: Some(lambda),
                        resolved_omega: Some(omega),
                        algo_a: cfg.algo_a.as_ref().map(|s| with_omega(s, omega)),
                        algo_b: cfg.algo_b.as_ref().map(|s| with_omega(s, omega)),
                        delta: cfg.delta,
                    })
                })
                .collect::<Result<_>>()?
        }
    };

    let mut rows = Vec::with_capacity(points.len() * cfg.tests.len());
    for point in &points {
        let outcomes: Vec<Vec<TestOutcome>> = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|rep| run_replication_resolved(cfg, point, rep))
            .collect::<Result<_>>()?;
        let reps = cfg.replications as u64;
        for (t_idx, &test) in cfg.tests.iter().enumerate() {
            let rejections = outcomes.iter().filter(|o| o[t_idx].reject).count() as u64;
            let degenerate = outcomes.iter().filter(|o| o[t_idx].degenerate).count() as u64;
            let rate = rejections as f64 / reps as f64;
            rows.push(ReportRow {
                test,
                sweep_parameter: point.sweep_parameter.map(str::to_string),
                sweep_value: point.sweep_value,
                resolved_omega: point.resolved_omega,
                rejections,
                degenerate,
                replications: reps,
                rejection_rate: rate,
                se: (rate * (1.0 - rate) / reps as f64).sqrt(),
            });
        }
    }
    Ok(SimulationReport {
        config_hash: config_hash(cfg),
        master_seed: cfg.master_seed,
        generator: cfg.generator,
        alpha: cfg.alpha,
        rows,
    })
}

// ---------------------------------------------------------------------------
// True error rates and calibration
// ---------------------------------------------------------------------------

/// Population error rates of both algorithms along a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueErrorCurve {
    pub config_hash: String,
    pub master_seed: u64,
    pub generator: GeneratorKind,
    pub points: Vec<CurvePoint>,
}

/// One sweep point of a [`TrueErrorCurve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sweep_parameter: Option<String>,
    pub sweep_value: Option<f64>,
    /// Mean population error of `algo_a` over the training replications.
    pub mu_a: f64,
    pub se_a: f64,
    pub mu_b: f64,
    pub se_b: f64,
    /// Training replications behind the means; 0 marks analytic values.
    pub replications: u64,
}

impl TrueErrorCurve {
    /// Plot-ready CSV, one row per sweep point.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("sweep_parameter,sweep_value,mu_a,se_a,mu_b,se_b,replications\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                p.sweep_parameter.as_deref().unwrap_or(""),
                fmt_opt(p.sweep_value),
                p.mu_a,
                p.se_a,
                p.mu_b,
                p.se_b,
                p.replications,
            ));
        }
        out
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("curve serializes");
        s.push('\n');
        s
    }
}

/// Estimates the true (population) error of both algorithms at every sweep
/// point by training on `replications` independent datasets and scoring
/// each fitted model against the generator's population oracle.
///
/// Oracles per generator: the exp6 grid is finite, so the error is computed
/// exactly over all 22,801 points; the simple problem admits a closed form
/// for threshold rules (majority, mean, logreg); epsilon is analytic with
/// both means equal to the configured marginal error rate. Lambda sweeps
/// have no direct parameter to put on the x-axis; sweep omega instead.
pub fn true_error_curve(cfg: &ScenarioConfig) -> Result<TrueErrorCurve> {
    cfg.validate()?;
    if matches!(cfg.sweep, Sweep::Lambda(_)) {
        return Err(Error::InvalidConfig(
            "true_error_curve sweeps direct parameters; lambda targets are derived from a \
             curve, not the other way around"
                .into(),
        ));
    }
    let points: Vec<ResolvedPoint> = match cfg.sweep.values() {
        None => vec![resolve_direct(cfg, None)?],
        Some(values) => values
            .iter()
            .map(|&v| resolve_direct(cfg, Some(v)))
            .collect::<Result<_>>()?,
    };

    let mut out = Vec::with_capacity(points.len());
    for point in &points {
        let curve_point = match cfg.generator {
            GeneratorKind::Epsilon => CurvePoint {
                sweep_parameter: None,
                sweep_value: None,
                mu_a: cfg.epsilon,
                se_a: 0.0,
                mu_b: cfg.epsilon,
                se_b: 0.0,
                replications: 0,
            },
            GeneratorKind::Exp6 | GeneratorKind::Simple => {
                let errors: Vec<(f64, f64)> = (0..cfg.replications as u64)
                    .into_par_iter()
                    .map(|rep| population_errors(cfg, point, rep))
                    .collect::<Result<_>>()?;
                let (mu_a, se_a) = mean_se(errors.iter().map(|e| e.0));
                let (mu_b, se_b) = mean_se(errors.iter().map(|e| e.1));
                CurvePoint {
                    sweep_parameter: point.sweep_parameter.map(str::to_string),
                    sweep_value: point.sweep_value,
                    mu_a,
                    se_a,
                    mu_b,
                    se_b,
                    replications: cfg.replications as u64,
                }
            }
        };
        out.push(curve_point);
    }
    Ok(TrueErrorCurve {
        config_hash: config_hash(cfg),
        master_seed: cfg.master_seed,
        generator: cfg.generator,
        points: out,
    })
}

/// Trains both algorithms on one fresh dataset and scores them against the
/// population oracle. Uses the `Calibration` seed stream, so curve draws
/// never collide with scenario replication draws.
fn population_errors(
    cfg: &ScenarioConfig,
    point: &ResolvedPoint,
    rep: u64,
) -> Result<(f64, f64)> {
    let seed = derive_seed(cfg.master_seed, Stream::Calibration, rep);
    let spec_a = point.algo_a.as_ref().expect("validated feature config");
    let spec_b = point.algo_b.as_ref().expect("validated feature config");
    match cfg.generator {
        GeneratorKind::Exp6 => {
            let train = exp6_sample(&Exp6Config { n: cfg.n }, seed)?;
            let pop = exp6_population();
            let err_a = fit(*spec_a, &train, seed)?.error_rate(pop)?;
            let err_b = fit(*spec_b, &train, seed)?.error_rate(pop)?;
            Ok((err_a, err_b))
        }
        GeneratorKind::Simple => {
            let train = simple_sample(&SimpleConfig { n: cfg.n, delta: point.delta }, seed)?;
            let err_a = simple_population_error(&fit(*spec_a, &train, seed)?, point.delta)?;
            let err_b = simple_population_error(&fit(*spec_b, &train, seed)?, point.delta)?;
            Ok((err_a, err_b))
        }
        GeneratorKind::Epsilon => unreachable!("epsilon curves are analytic"),
    }
}

fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact population error of a fitted model on the simple problem.
///
/// Every supported learner reduces to a threshold rule on the single
/// feature, and the class mixture is exactly balanced, so constant rules
/// (majority, a one-class fit, a flat logreg) err with probability exactly
/// 1/2, and genuine thresholds integrate the two Gaussian tails in closed
/// form. Learners without a closed form here (knn, trees) are rejected.
pub fn simple_population_error(model: &FittedModel, delta: f64) -> Result<f64> {
    use crate::datagen::simple_rule_error;
    match model {
        FittedModel::Majority(_) => Ok(0.5),
        FittedModel::Mean(m) => {
            let centroids = m.centroids();
            match centroids {
                [_] => Ok(0.5),
                [(0, lo), (1, hi)] => {
                    let (c0, c1) = (lo[0], hi[0]);
                    if c0 == c1 {
                        // Equal distances everywhere; ties predict class 0.
                        Ok(0.5)
                    } else {
                        let threshold = (c0 + c1) / 2.0;
                        Ok(simple_rule_error(threshold, c1 > c0, delta))
                    }
                }
                _ => Err(Error::InvalidConfig(
                    "simple population oracle expects classes {0, 1}".into(),
                )),
            }
        }
        FittedModel::Logreg(m) => {
            if m.constant().is_some() {
                return Ok(0.5);
            }
            let (intercept, weights, class_lo, class_hi) =
                m.linear().expect("binary fit has weights");
            if (class_lo, class_hi) != (0, 1) {
                return Err(Error::InvalidConfig(
                    "simple population oracle expects classes {0, 1}".into(),
                ));
            }
            let w = weights[0];
            if w == 0.0 {
                // The rule collapses to a constant decided by the intercept
                // sign; either constant errs on exactly half the mixture.
                return Ok(0.5);
            }
            Ok(simple_rule_error(-intercept / w, w > 0.0, delta))
        }
        other => Err(Error::InvalidConfig(format!(
            "no closed-form population error for this learner on the simple generator: {other:?}"
        ))),
    }
}

/// Inputs of a lambda-to-omega calibration on the exp6 problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Training-set size per replication.
    pub n: usize,
    /// Training replications per grid point (shared-draw across the grid).
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Omega grid; strictly increasing within (0, 1] and ending at 1.0.
    pub omega_grid: Vec<f64>,
    /// Algorithm whose true error anchors lambda = 0.
    pub reference: ClassifierSpec,
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("calibration n must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("calibration replications must be >= 1".into()));
        }
        if self.omega_grid.is_empty() {
            return Err(Error::InvalidConfig("omega_grid must be nonempty".into()));
        }
        for w in self.omega_grid.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidConfig(
                    "omega_grid must be strictly increasing".into(),
                ));
            }
        }
        let first = self.omega_grid[0];
        let last = *self.omega_grid.last().expect("nonempty");
        if !(first > 0.0) || last != 1.0 {
            return Err(Error::InvalidConfig(
                "omega_grid must lie in (0, 1] and end at 1.0 (the lambda = 1 anchor)".into(),
            ));
        }
        if matches!(self.reference, ClassifierSpec::FnnWeighted { .. }) {
            return Err(Error::InvalidConfig(
                "the calibration reference must differ from the swept fnn_weighted".into(),
            ));
        }
        self.reference.validate()
    }
}

/// Builds a [`CalibrationConfig`] out of a scenario that compares one
/// `fnn_weighted` learner against a reference: the non-fnn side anchors
/// the lambda = 0 target, the default omega grid spans (0, 1].
pub fn calibration_config(cfg: &ScenarioConfig) -> Result<CalibrationConfig> {
    let reference = match (&cfg.algo_a, &cfg.algo_b) {
        (Some(ClassifierSpec::FnnWeighted { .. }), Some(other)) => *other,
        (Some(other), Some(ClassifierSpec::FnnWeighted { .. })) => *other,
        _ => {
            return Err(Error::InvalidConfig(
                "lambda calibration needs one fnn_weighted algorithm and one reference".into(),
            ))
        }
    };
    Ok(CalibrationConfig {
        n: cfg.n,
        replications: cfg.calibration_replications,
        master_seed: cfg.master_seed,
        omega_grid: DEFAULT_OMEGA_GRID.to_vec(),
        reference,
    })
}

/// True-error curve of the weighted-metric learner over an omega grid,
/// together with the reference algorithm's true error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    /// Mean population error of the reference algorithm.
    pub mu_reference: f64,
    pub se_reference: f64,
    /// `(omega, mu, se)` per grid point, in grid order.
    pub points: Vec<CalibrationPoint>,
    pub replications: u64,
}

/// One omega grid point of a [`CalibrationCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub omega: f64,
    pub mu: f64,
    pub se: f64,
}

/// Estimates the calibration curve on the exp6 problem.
///
/// Each replication draws one training set (from the `Calibration` seed
/// stream), fits the reference once and the weighted-metric learner at
/// every grid omega, and scores all of them exactly on the 22,801-point
/// population. Sharing the draw across the grid makes the curve smooth in
/// omega, which is exactly what interpolation needs.
pub fn calibration_curve(cfg: &CalibrationConfig) -> Result<CalibrationCurve> {
    cfg.validate()?;
    let pop = exp6_population();
    let rows: Vec<(f64, Vec<f64>)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| -> Result<(f64, Vec<f64>)> {
            let seed = derive_seed(cfg.master_seed, Stream::Calibration, rep);
            let train = exp6_sample(&Exp6Config { n: cfg.n }, seed)?;
            let mu_ref = fit(cfg.reference, &train, seed)?.error_rate(pop)?;
            let mut mus = Vec::with_capacity(cfg.omega_grid.len());
            for &omega in &cfg.omega_grid {
                let model = fit(ClassifierSpec::FnnWeighted { omega }, &train, seed)?;
                mus.push(model.error_rate(pop)?);
            }
            Ok((mu_ref, mus))
        })
        .collect::<Result<_>>()?;

    let (mu_reference, se_reference) = mean_se(rows.iter().map(|r| r.0));
    let points = cfg
        .omega_grid
        .iter()
        .enumerate()
        .map(|(i, &omega)| {
            let (mu, se) = mean_se(rows.iter().map(|r| r.1[i]));
            CalibrationPoint { omega, mu, se }
        })
        .collect();
    Ok(CalibrationCurve {
        mu_reference,
        se_reference,
        points,
        replications: cfg.replications as u64,
    })
}

/// Maps a calibration target onto an omega by linear interpolation.
///
/// The target error is `mu_ref - lambda * (mu_ref - mu(1.0))`: lambda = 0
/// matches the reference exactly (the null hypothesis holds), lambda = 1
/// returns omega = 1.0. Scanning the grid left to right, the first segment
/// whose endpoint errors bracket the target is interpolated in omega; a
/// target outside the curve's range is an error.
pub fn interpolate_omega(curve: &CalibrationCurve, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("lambda {lambda} outside [0, 1]")));
    }
    if curve.points.is_empty() {
        return Err(Error::InvalidConfig("calibration curve has no points".into()));
    }
    let mu_end = curve.points.last().expect("nonempty").mu;
    // Lerp form: exactly mu_reference at lambda = 0 and exactly mu_end at
    // lambda = 1, where the a - l*(a - b) form can miss by one ulp and
    // push the boundary targets just outside the curve's range.
    let target = (1.0 - lambda) * curve.mu_reference + lambda * mu_end;
    for pair in curve.points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a.mu - target) * (b.mu - target) <= 0.0 {
            if a.mu == b.mu {
                return Ok(a.omega);
            }
            return Ok(a.omega + (b.omega - a.omega) * (target - a.mu) / (b.mu - a.mu));
        }
    }
    if curve.points.len() == 1 && curve.points[0].mu == target {
        return Ok(curve.points[0].omega);
    }
    let (lo, hi) = curve
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.mu), hi.max(p.mu)));
    Err(Error::CalibrationOutOfRange { target, lo, hi })
}

/// One-call form: estimates the calibration curve, then interpolates the
/// omega whose true error hits the lambda target.
pub fn calibrate_hyperparameter(cfg: &CalibrationConfig, lambda: f64) -> Result<f64> {
    interpolate_omega(&calibration_curve(cfg)?, lambda)
}

// ---------------------------------------------------------------------------
// Correlation sweep
// ---------------------------------------------------------------------------

fn default_rho_n() -> usize {
    300
}

fn default_rho_replications() -> usize {
    1000
}

fn default_rho_delta() -> f64 {
    1.0
}

/// Inputs of a correlation sweep over (generator, algorithm pair) jobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSweepConfig {
    /// Feature generators to sample from (epsilon has no features).
    pub generators: Vec<GeneratorKind>,
    /// Algorithm pairs compared on every generator.
    pub pairs: Vec<(ClassifierSpec, ClassifierSpec)>,
    /// Records sampled per replication (without replacement on exp6).
    #[serde(default = "default_rho_n")]
    pub n: usize,
    /// Replications per job; at least [`MIN_RHO_REPLICATIONS`].
    #[serde(default = "default_rho_replications")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Class separation used when sampling the simple generator; the
    /// default keeps the compared algorithms genuinely different.
    #[serde(default = "default_rho_delta")]
    pub delta: f64,
}

impl RhoSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() || self.pairs.is_empty() {
            return Err(Error::InvalidConfig(
                "rho sweep needs at least one generator and one pair".into(),
            ));
        }
        if self.generators.contains(&GeneratorKind::Epsilon) {
            return Err(Error::InvalidConfig(
                "the epsilon generator has no feature vectors to learn from".into(),
            ));
        }
        if self.n < 8 {
            return Err(Error::InvalidConfig(format!(
                "rho sweep n = {} is too small for a 5x2 partition (need >= 8)",
                self.n
            )));
        }
        if self.replications < MIN_RHO_REPLICATIONS {
            return Err(Error::InsufficientReplications {
                got: self.replications,
                min: MIN_RHO_REPLICATIONS,
            });
        }
        for (a, b) in &self.pairs {
            a.validate()?;
            b.validate()?;
        }
        for &generator in &self.generators {
            let probe = ScenarioConfig {
                generator,
                algo_a: None,
                algo_b: None,
                n: self.n,
                tests: vec![TestName::McnemarBcv5x2],
                replications: 1,
                alpha: 0.05,
                master_seed: 0,
                epsilon: 0.1,
                delta: self.delta,
                rho1: 0.5,
                rho2: 0.5,
                sweep: Sweep::None,
                calibration_replications: 1,
            };
            for (a, b) in &self.pairs {
                probe.check_algo(a)?;
                probe.check_algo(b)?;
            }
        }
        Ok(())
    }
}

/// Correlation estimate of one (generator, pair) job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoPoint {
    pub generator: GeneratorKind,
    /// Canonical spec strings, e.g. `knn:k=5`.
    pub algo_a: String,
    pub algo_b: String,
    /// `None` when the job was skipped (see `note`).
    pub estimate: Option<RhoEstimate>,
    /// Reason a job produced no estimate (for example identical algorithms
    /// never disagree, giving zero variance).
    pub note: Option<String>,
}

/// Estimates the fold-correlation pair for every (generator, algorithm
/// pair) job by repeated 5x2 runs on freshly sampled records.
///
/// Per replication: sample `n` records (without replacement from the exp6
/// grid; fresh draws from the simple generator), run one 5x2 partition,
/// and record the ten per-fold disagreement proportions. The per-job
/// `reps x 5 x 2` array then yields the correlation estimate. Jobs whose
/// disagreement variance is exactly zero (identical algorithms) are
/// reported as skipped rather than failing the sweep.
pub fn rho_sweep(cfg: &RhoSweepConfig) -> Result<Vec<RhoPoint>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &generator in &cfg.generators {
        for pair in &cfg.pairs {
            jobs.push((generator, *pair));
        }
    }

    let mut points = Vec::with_capacity(jobs.len());
    for (job_id, (generator, (spec_a, spec_b))) in jobs.into_iter().enumerate() {
        let e_values: Vec<[[f64; 2]; 5]> = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|rep| rho_replication(cfg, generator, &spec_a, &spec_b, job_id as u64, rep))
            .collect::<Result<_>>()?;
        let (estimate, note) = match estimate_rho(&e_values) {
            Ok(est) => (Some(est), None),
            Err(Error::ZeroVariance(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };
        points.push(RhoPoint {
            generator,
            algo_a: spec_a.to_string(),
            algo_b: spec_b.to_string(),
            estimate,
            note,
        });
    }
    Ok(points)
}

/// One 5x2 run of one job: the ten per-fold disagreement proportions.
fn rho_replication(
    cfg: &RhoSweepConfig,
    generator: GeneratorKind,
    spec_a: &ClassifierSpec,
    spec_b: &ClassifierSpec,
    job_id: u64,
    rep: u64,
) -> Result<[[f64; 2]; 5]> {
    let data_seed = derive_seed2(cfg.master_seed, Stream::RhoSample, job_id, rep);
    let data = match generator {
        GeneratorKind::Exp6 => exp6_sample_without_replacement(cfg.n, data_seed)?,
        GeneratorKind::Simple => {
            simple_sample(&SimpleConfig { n: cfg.n, delta: cfg.delta }, data_seed)?
        }
        GeneratorKind::Epsilon => unreachable!("validated away"),
    };
    let split_seed = derive_seed2(cfg.master_seed, Stream::BcvSplit, job_id, rep);
    let partition = bcv_5x2_partitions_n(cfg.n, split_seed)?;
    let mut e = [[0.0; 2]; 5];
    for (f, (train, valid)) in partition.folds().enumerate() {
        let table =
            predictions_table(&data, spec_a, spec_b, train, valid, cfg.master_seed, rep, f)?;
        e[f / 2][f % 2] = table.estimators().e;
    }
    Ok(e)
}

/// Quotes a CSV field when its content would break the row.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Plot-ready CSV of a correlation sweep; skipped jobs are omitted (their
/// notes belong on the console, not in the scatter data).
pub fn rho_points_to_csv(points: &[RhoPoint]) -> String {
    let mut out = String::from("dataset,algo_a,algo_b,rho1,rho2\n");
    for p in points {
        if let Some(est) = &p.estimate {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6}\n",
                p.generator,
                csv_field(&p.algo_a),
                csv_field(&p.algo_b),
                est.rho1,
                est.rho2,
            ));
        }
    }
    out
}
