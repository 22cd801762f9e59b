//! Block-regularized 5x2 cross-validated McNemar's test for comparing two
//! classification algorithms, with the partitioning scheme, contingency-table
//! machinery, baseline tests, synthetic data generators, and a Monte Carlo
//! harness around it.
//!
//! # Overview
//!
//! Comparing two classifiers on one hold-out split wastes data; pooling
//! per-fold McNemar statistics over ordinary cross-validation ignores the
//! correlation between folds and mis-states the size of the test. This crate
//! implements the middle road: a 5x2 cross-validation whose ten folds are
//! assembled from eight fixed blocks so that every pair of training sets
//! overlaps in exactly n/4 records, which pins the fold correlations into a
//! narrow box and allows a single calibrated chi-squared(1) decision on the
//! cell-wise averaged contingency table.
//!
//! ```
//! use blockcv::contingency::{average_table, table_from_predictions};
//! use blockcv::significance::mcnemar_bcv_5x2;
//!
//! # fn main() -> blockcv::error::Result<()> {
//! // Ten fold tables from a 5x2 block-regularized run...
//! let tables = vec![
//!     table_from_predictions(&[0, 1, 1, 0], &[0, 1, 0, 1], &[0, 1, 1, 1])?;
//!     10
//! ];
//! let avg = average_table(&tables)?;
//! let result = mcnemar_bcv_5x2(&avg, 0.05);
//! println!("{}", result.to_json());
//! # Ok(())
//! # }
//! ```
//!
//! # Modules
//!
//! * [`partition`] — hold-out, K-fold, and block-regularized 5x2 splits.
//! * [`contingency`] — 2x2 tables, estimators, Beta posteriors, averaged and
//!   effective tables, correlation estimation.
//! * [`significance`] — the McNemar family plus standard baselines.
//! * [`classifiers`] — small self-contained learners for the experiments.
//! * [`datagen`] — synthetic generators with known population error rates.
//! * [`simulation`] — deterministic, parallel Monte Carlo studies of test
//!   size and power.

// Negated float comparisons (`!(x > 0.0)`) are deliberate throughout: they
// reject NaN along with the out-of-range values, which `x <= 0.0` would let
// through. Reference constants keep every digit of the sources they were
// frozen from, even past f64 precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod classifiers;
pub mod contingency;
pub mod datagen;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod partition;
pub mod rng;
pub mod significance;
// Remaining modules land below as they are written.
pub mod simulation;

pub use classifiers::ClassifierSpec;
pub use contingency::{AveragedTable, ContingencyTable, EffectiveTable};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use significance::{TestResult, TestStatus};
pub use simulation::{run_scenario, ScenarioConfig, SimulationReport, TestName};
