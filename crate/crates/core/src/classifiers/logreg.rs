//! Binary logistic regression fit by damped Newton iterations.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Newton iteration cap.
const MAX_ITER: usize = 100;
/// Gradient infinity-norm convergence tolerance.
const GRAD_TOL: f64 = 1e-8;
/// Tikhonov term keeping the Hessian invertible on separated data.
const RIDGE: f64 = 1e-10;
/// Maximum step halvings per iteration before declaring a stall.
const MAX_HALVINGS: usize = 30;

/// Fitted binary logistic regression.
///
/// Labels are mapped onto {0, 1} by sorted class id; a training set with a
/// single class yields a constant predictor, and more than two classes is
/// an error.
#[derive(Clone, Debug)]
pub struct LogregModel {
    pub(crate) dim: usize,
    kind: LogregKind,
}

#[derive(Clone, Debug)]
enum LogregKind {
    /// Only one class was present in training.
    Constant(u32),
    /// `weights[0]` is the intercept; `weights[1..]` the feature
    /// coefficients. Positive linear score predicts `class_hi`.
    Binary { class_lo: u32, class_hi: u32, weights: Vec<f64> },
}

/// Numerically stable logistic function.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Solves `a * x = b` in place by Gaussian elimination with partial
/// pivoting; `a` is row-major `n x n`.
fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs()))
            .expect("non-empty range");
        if a[pivot_row * n + col].abs() < 1e-300 {
            return Err(Error::Classifier("singular Hessian in logistic regression".into()));
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in (row + 1)..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

impl LogregModel {
    pub(crate) fn fit(train: &Dataset) -> Result<Self> {
        let classes = train.class_set();
        match classes.len() {
            1 => {
                return Ok(LogregModel {
                    dim: train.dim(),
                    kind: LogregKind::Constant(classes[0]),
                })
            }
            2 => {}
            k => {
                return Err(Error::Classifier(format!(
                    "logistic regression supports exactly two classes, got {k}"
                )))
            }
        }
        let (class_lo, class_hi) = (classes[0], classes[1]);
        let d = train.dim();
        let p = d + 1; // intercept + coefficients
        let y: Vec<f64> =
            train.labels().iter().map(|&l| if l == class_hi { 1.0 } else { 0.0 }).collect();

        // Augmented row: (1, x_1, ..., x_d).
        let xrow = |i: usize, j: usize| -> f64 {
            if j == 0 {
                1.0
            } else {
                train.row(i)[j - 1]
            }
        };
        let score = |w: &[f64], i: usize| -> f64 {
            let mut z = w[0];
            for (j, wj) in w.iter().enumerate().skip(1) {
                z += wj * train.row(i)[j - 1];
            }
            z
        };
        let loss = |w: &[f64]| -> f64 {
            let mut acc = 0.0;
            for (i, &yi) in y.iter().enumerate() {
                let z = score(w, i);
                acc += if yi > 0.5 { softplus(-z) } else { softplus(z) };
            }
            acc + 0.5 * RIDGE * w.iter().map(|v| v * v).sum::<f64>()
        };

        let mut w = vec![0.0; p];
        let mut current_loss = loss(&w);
        for _ in 0..MAX_ITER {
            // Gradient and Hessian of the penalized log-loss.
            let mut grad = vec![0.0; p];
            let mut hess = vec![0.0; p * p];
            for (i, &yi) in y.iter().enumerate() {
                let prob = sigmoid(score(&w, i));
                let resid = prob - yi;
                let curve = prob * (1.0 - prob);
                for j in 0..p {
                    let xj = xrow(i, j);
                    grad[j] += xj * resid;
                    for l in j..p {
                        hess[j * p + l] += curve * xj * xrow(i, l);
                    }
                }
            }
            for j in 0..p {
                grad[j] += RIDGE * w[j];
                hess[j * p + j] += RIDGE;
                for l in 0..j {
                    hess[j * p + l] = hess[l * p + j];
                }
            }
            if grad.iter().all(|g| g.abs() < GRAD_TOL) {
                break;
            }
            let step = solve_linear(&mut hess, &mut grad, p)?;

            // Backtracking: halve the step until the loss improves.
            let mut eta = 1.0;
            let mut improved = false;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> =
                    w.iter().zip(&step).map(|(wj, s)| wj - eta * s).collect();
                let trial_loss = loss(&trial);
                if trial_loss < current_loss {
                    w = trial;
                    current_loss = trial_loss;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break; // stalled: as converged as the arithmetic allows
            }
        }

        Ok(LogregModel { dim: d, kind: LogregKind::Binary { class_lo, class_hi, weights: w } })
    }

    pub(crate) fn predict(&self, x: &[f64]) -> u32 {
        match &self.kind {
            LogregKind::Constant(c) => *c,
            LogregKind::Binary { class_lo, class_hi, weights } => {
                let mut z = weights[0];
                for (wj, xj) in weights[1..].iter().zip(x) {
                    z += wj * xj;
                }
                if z > 0.0 {
                    *class_hi
                } else {
                    *class_lo
                }
            }
        }
    }

    /// The fitted linear rule `(intercept, coefficients, class_lo,
    /// class_hi)`; `None` for a constant model. A positive score
    /// `intercept + coefficients . x` predicts `class_hi`.
    pub fn linear(&self) -> Option<(f64, &[f64], u32, u32)> {
        match &self.kind {
            LogregKind::Constant(_) => None,
            LogregKind::Binary { class_lo, class_hi, weights } => {
                Some((weights[0], &weights[1..], *class_lo, *class_hi))
            }
        }
    }

    /// The constant class of a one-class fit, if any.
    pub fn constant(&self) -> Option<u32> {
        match &self.kind {
            LogregKind::Constant(c) => Some(*c),
            LogregKind::Binary { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ClassifierSpec};
    use crate::dataset::Dataset;

    fn data_1d(xs: &[f64], ys: &[u32]) -> Dataset {
        Dataset::from_parts(xs.to_vec(), 1, ys.to_vec()).unwrap()
    }

    #[test]
    fn separable_1d_is_classified_exactly() {
        let d = data_1d(&[-3.0, -2.5, -2.0, 2.0, 2.5, 3.0], &[0, 0, 0, 1, 1, 1]);
        let m = fit(ClassifierSpec::Logreg, &d, 0).unwrap();
        assert_eq!(m.error_rate(&d).unwrap(), 0.0);
        assert_eq!(m.predict(&[-10.0]).unwrap(), 0);
        assert_eq!(m.predict(&[10.0]).unwrap(), 1);
    }

    #[test]
    fn boundary_sits_between_the_classes() {
        let d = data_1d(&[-3.0, -2.5, -2.0, 2.0, 2.5, 3.0], &[0, 0, 0, 1, 1, 1]);
        let crate::classifiers::FittedModel::Logreg(m) = fit(ClassifierSpec::Logreg, &d, 0).unwrap()
        else {
            panic!("expected logreg")
        };
        let (w0, w, _, _) = m.linear().unwrap();
        assert!(w[0] > 0.0, "slope should be positive toward class 1");
        let boundary = -w0 / w[0];
        assert!(
            boundary.abs() < 2.0,
            "boundary {boundary} should sit between the class clusters"
        );
    }

    #[test]
    fn reversed_orientation_learns_negative_slope() {
        let d = data_1d(&[2.0, 3.0, 4.0, -4.0, -3.0, -2.0], &[0, 0, 0, 1, 1, 1]);
        let m = fit(ClassifierSpec::Logreg, &d, 0).unwrap();
        assert_eq!(m.error_rate(&d).unwrap(), 0.0);
        assert_eq!(m.predict(&[-10.0]).unwrap(), 1);
    }

    #[test]
    fn single_class_yields_constant_model() {
        let d = data_1d(&[1.0, 2.0, 3.0], &[7, 7, 7]);
        let m = fit(ClassifierSpec::Logreg, &d, 0).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), 7);
        assert_eq!(m.predict(&[100.0]).unwrap(), 7);
    }

    #[test]
    fn three_classes_is_an_error() {
        let d = data_1d(&[1.0, 2.0, 3.0], &[0, 1, 2]);
        assert!(matches!(fit(ClassifierSpec::Logreg, &d, 0), Err(Error::Classifier(_))));
    }

    #[test]
    fn overlapping_classes_produce_finite_weights() {
        let xs = [-1.0, -0.6, -0.2, 0.1, -0.3, 0.2, 0.5, 1.0, 0.3, -0.1];
        let ys = [0, 0, 0, 0, 1, 1, 1, 1, 0, 1];
        let d = data_1d(&xs, &ys);
        let crate::classifiers::FittedModel::Logreg(m) = fit(ClassifierSpec::Logreg, &d, 0).unwrap()
        else {
            panic!("expected logreg")
        };
        let (w0, w, _, _) = m.linear().unwrap();
        assert!(w0.is_finite() && w[0].is_finite());
        assert!(w[0] > 0.0);
    }

    #[test]
    fn two_dimensional_blobs_separate() {
        let features = vec![
            0.0, 0.0, 0.5, -0.2, -0.3, 0.4, //
            5.0, 5.0, 5.5, 4.8, 4.7, 5.3,
        ];
        let d = Dataset::from_parts(features, 2, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let m = fit(ClassifierSpec::Logreg, &d, 0).unwrap();
        assert_eq!(m.error_rate(&d).unwrap(), 0.0);
    }

    #[test]
    fn beats_majority_on_separated_data() {
        let train = data_1d(&[-2.0, -1.9, -1.8, -1.7, 1.7, 1.8, 1.9, 2.0], &[0, 0, 0, 0, 1, 1, 1, 1]);
        let valid = data_1d(&[-1.5, -1.0, -0.5, 0.5, 1.0, 1.5], &[0, 0, 0, 1, 1, 1]);
        let lr = fit(ClassifierSpec::Logreg, &train, 0).unwrap();
        let maj = fit(ClassifierSpec::Majority, &train, 0).unwrap();
        assert!(lr.error_rate(&valid).unwrap() < maj.error_rate(&valid).unwrap());
    }

    #[test]
    fn solve_linear_small_system() {
        // [2 1; 1 3] x = [5; 10] -> x = (1, 3).
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![5.0, 10.0];
        let x = solve_linear(&mut a, &mut b, 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);

        let mut singular = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 2.0];
        assert!(solve_linear(&mut singular, &mut b, 2).is_err());
    }

    #[test]
    fn sigmoid_and_softplus_are_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0);
        assert!(sigmoid(-800.0) == 0.0);
        assert!(softplus(800.0) == 800.0);
        assert!(softplus(-800.0) == 0.0);
        assert!((softplus(0.0) - 2.0f64.ln()).abs() < 1e-15);
    }
}
