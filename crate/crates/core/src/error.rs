//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by partitioning, table algebra, significance tests,
/// classifiers, generators, and the simulation harness.
#[derive(Error, Debug)]
pub enum Error {
    /// A split fraction or fold count would leave one side of a partition empty.
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    /// Fold count outside `2 ..= n`.
    #[error("invalid fold count K={k} for n={n}")]
    InvalidFoldCount { k: usize, n: usize },

    /// A multi-fold test was handed fewer fold results than it needs.
    #[error("need at least {min} folds, got {got}")]
    TooFewFolds { got: usize, min: usize },

    /// The 5x2 block-regularized scheme needs at least eight records.
    #[error("dataset too small: n={n}, need n >= {min}")]
    DatasetTooSmall { n: usize, min: usize },

    /// Prediction/label vectors disagree in length.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// An averaged table must be built from exactly ten fold tables.
    #[error("expected {expected} contingency tables, got {got}")]
    WrongTableCount { expected: usize, got: usize },

    /// Beta prior parameter must be positive.
    #[error("invalid Beta prior lambda={0}; must be > 0")]
    InvalidPrior(f64),

    /// Correlation estimation needs enough replications to be meaningful.
    #[error("insufficient replications: {got}, need >= {min}")]
    InsufficientReplications { got: usize, min: usize },

    /// A variance that must be positive is zero (identical replications,
    /// constant differences, ...).
    #[error("zero variance: {0}")]
    ZeroVariance(String),

    /// The correlation pair makes the compression factor non-positive.
    #[error("invalid correlations: 1 + rho1 + 8*rho2 = {0} must be > 0")]
    InvalidRho(f64),

    /// Reference distribution parameters out of range.
    #[error("invalid distribution parameter: {0}")]
    InvalidDistribution(String),

    /// Classifier fitting failed (empty training set, unsupported class
    /// structure, wrong feature dimension).
    #[error("classifier error: {0}")]
    Classifier(String),

    /// A classifier spec string or hyperparameter is malformed.
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),

    /// A generator or scenario configuration is out of its documented domain.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Hyperparameter calibration target lies outside the achievable range.
    #[error("calibration target {target:.6} outside achievable range [{lo:.6}, {hi:.6}]")]
    CalibrationOutOfRange { target: f64, lo: f64, hi: f64 },

    /// CSV ingestion/export failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Filesystem failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
