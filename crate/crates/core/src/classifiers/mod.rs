//! Self-contained learning algorithms for the desk-scale experiments.
//!
//! Seven kinds are supported:
//!
//! * `majority` — predicts the most frequent training label, features ignored;
//! * `mean` — nearest class centroid (squared Euclidean);
//! * `logreg` — binary logistic regression fit by damped Newton iterations;
//! * `fnn_weighted` — first nearest neighbor under the two-feature weighted
//!   distance `omega * dx1^2 + omega^-1 * dx2^2`, `omega` in (0, 1];
//! * `fnn_distorted` — first nearest neighbor under the sixteen-feature
//!   group-distorted distance with parameter `upsilon` in [1, 50];
//! * `knn` — k-nearest-neighbor vote with a triangle kernel (k = 5 by
//!   default);
//! * `tree` — greedy binary Gini decision tree, no pruning.
//!
//! All fits are deterministic: ties in majority votes break toward the
//! smallest class id, nearest-neighbor distance ties toward the earliest
//! training record, and tree split ties toward the lowest feature index and
//! threshold. The `seed` argument of [`fit`] is part of the interface for
//! generator parity but no current kind draws random numbers.

mod logreg;
mod nearest;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub use logreg::LogregModel;
pub use nearest::{FnnMetric, FnnModel, KnnModel, MajorityModel, MeanModel};
pub use tree::TreeModel;

/// Default neighbor count for `knn`.
pub const DEFAULT_KNN_K: usize = 5;
/// Default depth cap for `tree`.
pub const DEFAULT_TREE_MAX_DEPTH: usize = 25;
/// Default minimum records per leaf for `tree`.
pub const DEFAULT_TREE_MIN_LEAF: usize = 2;

/// A classifier kind plus its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    /// Most frequent training label.
    Majority,
    /// Nearest class centroid.
    Mean,
    /// Binary logistic regression.
    Logreg,
    /// Weighted first nearest neighbor; requires two features.
    FnnWeighted { omega: f64 },
    /// Group-distorted first nearest neighbor; requires sixteen features.
    FnnDistorted { upsilon: f64 },
    /// Triangle-kernel k-nearest-neighbor vote.
    Knn { k: usize },
    /// Greedy binary Gini tree.
    Tree { max_depth: usize, min_leaf: usize },
}

impl ClassifierSpec {
    /// Canonical kind name as used in CLI strings and CSV columns.
    pub fn kind_name(&self) -> &'static str {
        match self {
            ClassifierSpec::Majority => "majority",
            ClassifierSpec::Mean => "mean",
            ClassifierSpec::Logreg => "logreg",
            ClassifierSpec::FnnWeighted { .. } => "fnn_weighted",
            ClassifierSpec::FnnDistorted { .. } => "fnn_distorted",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::Tree { .. } => "tree",
        }
    }

    /// Checks hyperparameter ranges: `omega` in (0, 1], `upsilon` in
    /// [1, 50], `k >= 1`, tree limits >= 1.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierSpec::FnnWeighted { omega } => {
                if !(omega > 0.0 && omega <= 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "omega = {omega} outside (0, 1]"
                    )));
                }
            }
            ClassifierSpec::FnnDistorted { upsilon } => {
                if !(1.0..=50.0).contains(&upsilon) {
                    return Err(Error::InvalidSpec(format!(
                        "upsilon = {upsilon} outside [1, 50]"
                    )));
                }
            }
            ClassifierSpec::Knn { k } => {
                if k < 1 {
                    return Err(Error::InvalidSpec("knn needs k >= 1".into()));
                }
            }
            ClassifierSpec::Tree { max_depth, min_leaf } => {
                if max_depth < 1 || min_leaf < 1 {
                    return Err(Error::InvalidSpec(
                        "tree needs max_depth >= 1 and min_leaf >= 1".into(),
                    ));
                }
            }
            ClassifierSpec::Majority | ClassifierSpec::Mean | ClassifierSpec::Logreg => {}
        }
        Ok(())
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ClassifierSpec::FnnWeighted { omega } => write!(f, "fnn_weighted:omega={omega}"),
            ClassifierSpec::FnnDistorted { upsilon } => {
                write!(f, "fnn_distorted:upsilon={upsilon}")
            }
            ClassifierSpec::Knn { k } => write!(f, "knn:k={k}"),
            ClassifierSpec::Tree { max_depth, min_leaf } => {
                write!(f, "tree:max_depth={max_depth},min_leaf={min_leaf}")
            }
            _ => f.write_str(self.kind_name()),
        }
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    /// Parses `"kind"` or `"kind:key=value,key=value"`, e.g.
    /// `"fnn_weighted:omega=0.29"` or `"tree:max_depth=5"`. Omitted
    /// parameters take their defaults; unknown kinds and keys are errors.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        if !params.is_empty() {
            for item in params.split(',') {
                let (key, value) = item.split_once('=').ok_or_else(|| {
                    Error::InvalidSpec(format!("expected key=value, got {item:?}"))
                })?;
                pairs.push((key.trim(), value.trim()));
            }
        }
        let f64_param = |pairs: &[(&str, &str)], key: &str, default: f64| -> Result<f64> {
            match pairs.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSpec(format!("{key} = {v:?} is not a number"))),
                None => Ok(default),
            }
        };
        let usize_param = |pairs: &[(&str, &str)], key: &str, default: usize| -> Result<usize> {
            match pairs.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSpec(format!("{key} = {v:?} is not an integer"))),
                None => Ok(default),
            }
        };
        let allow_keys = |pairs: &[(&str, &str)], allowed: &[&str]| -> Result<()> {
            for (k, _) in pairs {
                if !allowed.contains(k) {
                    return Err(Error::InvalidSpec(format!(
                        "unknown parameter {k:?} for kind {kind:?}"
                    )));
                }
            }
            Ok(())
        };

        let spec = match kind {
            "majority" => {
                allow_keys(&pairs, &[])?;
                ClassifierSpec::Majority
            }
            "mean" => {
                allow_keys(&pairs, &[])?;
                ClassifierSpec::Mean
            }
            "logreg" => {
                allow_keys(&pairs, &[])?;
                ClassifierSpec::Logreg
            }
            "fnn_weighted" => {
                allow_keys(&pairs, &["omega"])?;
                ClassifierSpec::FnnWeighted { omega: f64_param(&pairs, "omega", 1.0)? }
            }
            "fnn_distorted" => {
                allow_keys(&pairs, &["upsilon"])?;
                ClassifierSpec::FnnDistorted { upsilon: f64_param(&pairs, "upsilon", 1.0)? }
            }
            "knn" => {
                allow_keys(&pairs, &["k"])?;
                ClassifierSpec::Knn { k: usize_param(&pairs, "k", DEFAULT_KNN_K)? }
            }
            "tree" => {
                allow_keys(&pairs, &["max_depth", "min_leaf"])?;
                ClassifierSpec::Tree {
                    max_depth: usize_param(&pairs, "max_depth", DEFAULT_TREE_MAX_DEPTH)?,
                    min_leaf: usize_param(&pairs, "min_leaf", DEFAULT_TREE_MIN_LEAF)?,
                }
            }
            other => {
                return Err(Error::InvalidSpec(format!("unknown classifier kind {other:?}")))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A trained classifier: the spec plus learned state.
#[derive(Clone, Debug)]
pub enum FittedModel {
    Majority(MajorityModel),
    Mean(MeanModel),
    Logreg(LogregModel),
    Fnn(FnnModel),
    Knn(KnnModel),
    Tree(TreeModel),
}

impl FittedModel {
    /// Feature dimension the model was trained on.
    pub fn dim(&self) -> usize {
        match self {
            FittedModel::Majority(m) => m.dim,
            FittedModel::Mean(m) => m.dim,
            FittedModel::Logreg(m) => m.dim,
            FittedModel::Fnn(m) => m.dim(),
            FittedModel::Knn(m) => m.dim(),
            FittedModel::Tree(m) => m.dim,
        }
    }

    /// Predicts the class of one feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<u32> {
        if x.len() != self.dim() {
            return Err(Error::Classifier(format!(
                "feature dimension {} does not match model dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(match self {
            FittedModel::Majority(m) => m.predict(),
            FittedModel::Mean(m) => m.predict(x),
            FittedModel::Logreg(m) => m.predict(x),
            FittedModel::Fnn(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Tree(m) => m.predict(x),
        })
    }

    /// Predicts every record of a dataset.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<u32>> {
        (0..data.n()).map(|i| self.predict(data.row(i))).collect()
    }

    /// Fraction of misclassified records (one-zero loss).
    pub fn error_rate(&self, valid: &Dataset) -> Result<f64> {
        if valid.n() == 0 {
            return Err(Error::DatasetTooSmall { n: 0, min: 1 });
        }
        let wrong = self
            .predict_dataset(valid)?
            .iter()
            .zip(valid.labels())
            .filter(|(yhat, y)| yhat != y)
            .count();
        Ok(wrong as f64 / valid.n() as f64)
    }
}

/// Trains a classifier on a dataset.
///
/// `seed` keeps the signature uniform with the generators; every current
/// kind is deterministic and ignores it. Errors on an empty training set,
/// invalid hyperparameters, or a feature-dimension mismatch
/// (`fnn_weighted` needs exactly 2 features, `fnn_distorted` exactly 16).
pub fn fit(spec: ClassifierSpec, train: &Dataset, _seed: u64) -> Result<FittedModel> {
    spec.validate()?;
    if train.n() == 0 {
        return Err(Error::Classifier("empty training set".into()));
    }
    match spec {
        ClassifierSpec::Majority => Ok(FittedModel::Majority(MajorityModel::fit(train))),
        ClassifierSpec::Mean => Ok(FittedModel::Mean(MeanModel::fit(train))),
        ClassifierSpec::Logreg => Ok(FittedModel::Logreg(LogregModel::fit(train)?)),
        ClassifierSpec::FnnWeighted { omega } => {
            require_dim(train, 2, "fnn_weighted")?;
            Ok(FittedModel::Fnn(FnnModel::fit(train, FnnMetric::Weighted { omega })))
        }
        ClassifierSpec::FnnDistorted { upsilon } => {
            require_dim(train, 16, "fnn_distorted")?;
            Ok(FittedModel::Fnn(FnnModel::fit(train, FnnMetric::Distorted { upsilon })))
        }
        ClassifierSpec::Knn { k } => Ok(FittedModel::Knn(KnnModel::fit(train, k))),
        ClassifierSpec::Tree { max_depth, min_leaf } => {
            Ok(FittedModel::Tree(TreeModel::fit(train, max_depth, min_leaf)))
        }
    }
}

fn require_dim(train: &Dataset, dim: usize, kind: &str) -> Result<()> {
    if train.dim() != dim {
        return Err(Error::Classifier(format!(
            "{kind} needs exactly {dim} features, got {}",
            train.dim()
        )));
    }
    Ok(())
}

/// Majority vote over `(class, weight)` pairs; ties break toward the
/// smallest class id. Returns `None` for an empty iterator.
pub(crate) fn weighted_majority(votes: impl IntoIterator<Item = (u32, f64)>) -> Option<u32> {
    let mut tally: Vec<(u32, f64)> = Vec::new();
    for (class, weight) in votes {
        match tally.iter_mut().find(|(c, _)| *c == class) {
            Some((_, w)) => *w += weight,
            None => tally.push((class, weight)),
        }
    }
    tally
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
}

/// Squared Euclidean distance.
pub(crate) fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
