//! Property tests of the contingency machinery: random tables, loss
//! vectors, and correlation pairs must satisfy the algebraic identities
//! the tests are built on.

use blockcv::contingency::{
    average_table, effective_table, table_from_losses, table_from_predictions, variance_e5x2,
    ContingencyTable,
};
use proptest::prelude::*;

fn cell() -> impl Strategy<Value = u64> {
    0u64..400
}

fn table() -> impl Strategy<Value = ContingencyTable> {
    (cell(), cell(), cell(), cell())
        .prop_map(|(n00, n01, n10, n11)| ContingencyTable { n00, n01, n10, n11 })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    /// The plug-in identity behind the statistic: the uncorrected McNemar
    /// quantity `(n01 - n10)^2 / (n01 + n10)` equals `n * e * (2r - 1)^2`.
    #[test]
    fn disagreement_identity(t in table()) {
        prop_assume!(t.n01 + t.n10 > 0);
        let est = t.estimators();
        let d = t.n01 as f64 - t.n10 as f64;
        let lhs = d * d / (t.n01 + t.n10) as f64;
        let r = est.r.expect("positive disagreement mass");
        let rhs = t.n2() as f64 * est.e * (2.0 * r - 1.0) * (2.0 * r - 1.0);
        prop_assert!(rel_close(lhs, rhs, 1e-12), "{} vs {}", lhs, rhs);
    }

    /// Plug-in estimators stay in [0, 1] and are `None` exactly on zero
    /// denominators.
    #[test]
    fn estimators_are_proportions(t in table()) {
        let est = t.estimators();
        prop_assert!((0.0..=1.0).contains(&est.e));
        prop_assert_eq!(est.r.is_none(), t.n01 + t.n10 == 0);
        prop_assert_eq!(est.qa.is_none(), t.n01 + t.n11 == 0);
        prop_assert_eq!(est.qb.is_none(), t.n10 + t.n00 == 0);
        for v in [est.r, est.qa, est.qb].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    /// Tables built from loss vectors count what they should, and swapping
    /// the algorithms transposes the off-diagonal cells.
    #[test]
    fn loss_tables_count_and_transpose(
        losses in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..200)
    ) {
        let a: Vec<bool> = losses.iter().map(|l| l.0).collect();
        let b: Vec<bool> = losses.iter().map(|l| l.1).collect();
        let t = table_from_losses(&a, &b).unwrap();

        let count = |fa: bool, fb: bool| {
            losses.iter().filter(|l| l.0 == fa && l.1 == fb).count() as u64
        };
        prop_assert_eq!(t.n00, count(true, true), "both wrong");
        prop_assert_eq!(t.n01, count(true, false), "only A wrong");
        prop_assert_eq!(t.n10, count(false, true), "only B wrong");
        prop_assert_eq!(t.n11, count(false, false), "neither wrong");
        prop_assert_eq!(t.n2(), losses.len() as u64);

        let swapped = table_from_losses(&b, &a).unwrap();
        prop_assert_eq!(swapped.n01, t.n10);
        prop_assert_eq!(swapped.n10, t.n01);
        prop_assert_eq!(swapped.n00, t.n00);
        prop_assert_eq!(swapped.n11, t.n11);
    }

    /// Prediction-based and loss-based construction agree.
    #[test]
    fn predictions_agree_with_losses(
        rows in proptest::collection::vec((0u32..3, 0u32..3, 0u32..3), 1..150)
    ) {
        let y: Vec<u32> = rows.iter().map(|r| r.0).collect();
        let pa: Vec<u32> = rows.iter().map(|r| r.1).collect();
        let pb: Vec<u32> = rows.iter().map(|r| r.2).collect();
        let from_preds = table_from_predictions(&y, &pa, &pb).unwrap();

        let la: Vec<bool> = rows.iter().map(|r| r.1 != r.0).collect();
        let lb: Vec<bool> = rows.iter().map(|r| r.2 != r.0).collect();
        let from_losses = table_from_losses(&la, &lb).unwrap();
        prop_assert_eq!(from_preds, from_losses);
    }

    /// Averaging ten fold tables is the cell-wise mean.
    #[test]
    fn averaged_table_is_cellwise_mean(tables in proptest::collection::vec(table(), 10)) {
        let avg = average_table(&tables).unwrap();
        let mean = |f: fn(&ContingencyTable) -> u64| {
            tables.iter().map(|t| f(t) as f64).sum::<f64>() / 10.0
        };
        prop_assert_eq!(avg.nbar00, mean(|t| t.n00));
        prop_assert_eq!(avg.nbar01, mean(|t| t.n01));
        prop_assert_eq!(avg.nbar10, mean(|t| t.n10));
        prop_assert_eq!(avg.nbar11, mean(|t| t.n11));
    }

    /// The effective table is the averaged table scaled by the compression
    /// factor, so its proportion estimators are unchanged and its mass is
    /// the effective validation size whenever the fold masses are complete.
    #[test]
    fn effective_table_rescales_without_distortion(
        tables in proptest::collection::vec(table(), 10),
        rho1 in 0.0f64..1.0,
        rho2 in 0.0f64..0.5,
    ) {
        let avg = average_table(&tables).unwrap();
        prop_assume!(avg.sum() > 0.0);
        let n = 64;
        let eff = effective_table(&avg, rho1, rho2, n).unwrap();

        let kappa = 1.0 + rho1 + 8.0 * rho2;
        let t = 10.0 / kappa;
        prop_assert!(rel_close(eff.t, t, 1e-12));
        prop_assert!(rel_close(eff.n_e, 5.0 * n as f64 / kappa, 1e-12));
        prop_assert!(rel_close(eff.ne00, t * avg.nbar00, 1e-12));
        prop_assert!(rel_close(eff.ne01, t * avg.nbar01, 1e-12));
        prop_assert!(rel_close(eff.ne10, t * avg.nbar10, 1e-12));
        prop_assert!(rel_close(eff.ne11, t * avg.nbar11, 1e-12));
        prop_assert!(rel_close(eff.sum(), t * avg.sum(), 1e-12));

        let (ae, be) = (avg.estimators(), eff.estimators());
        prop_assert!(rel_close(ae.e, be.e, 1e-12));
        match (ae.r, be.r) {
            (Some(a), Some(b)) => prop_assert!(rel_close(a, b, 1e-12)),
            (None, None) => {}
            other => prop_assert!(false, "r mismatch: {:?}", other),
        }
    }

    /// With the uniform prior the posterior modes reproduce the plug-in
    /// estimators wherever those are defined.
    #[test]
    fn posterior_modes_match_plugin_at_lambda_one(t in table()) {
        prop_assume!(t.n2() > 0);
        let post = t.posterior_params(1.0).unwrap();
        let est = t.estimators();

        let mode_e = post.e.mode().expect("counts >= 0 plus uniform prior");
        prop_assert!(rel_close(mode_e, est.e, 1e-12));
        if let (Some(mode_r), Some(r)) = (post.r.mode(), est.r) {
            if t.n01 + t.n10 > 0 {
                prop_assert!(rel_close(mode_r, r, 1e-12));
            }
        }
        if let (Some(mode_qa), Some(qa)) = (post.qa.mode(), est.qa) {
            if t.n01 + t.n11 > 0 {
                prop_assert!(rel_close(mode_qa, qa, 1e-12));
            }
        }
    }

    /// The disagreement-variance formula scales linearly in the
    /// correlation factor and vanishes at the extremes.
    #[test]
    fn variance_formula_scales(
        e in 0.0f64..=1.0,
        n in 1usize..2000,
        rho1 in 0.0f64..1.0,
        rho2 in 0.0f64..0.5,
    ) {
        let v = variance_e5x2(e, n, rho1, rho2);
        let kappa = 1.0 + rho1 + 8.0 * rho2;
        prop_assert!(rel_close(v, kappa * e * (1.0 - e) / (5.0 * n as f64), 1e-12));
        prop_assert!(v >= 0.0);
        prop_assert_eq!(variance_e5x2(0.0, n, rho1, rho2), 0.0);
        prop_assert_eq!(variance_e5x2(1.0, n, rho1, rho2), 0.0);
        // Independence (rho1 = rho2 = 0) is the floor.
        prop_assert!(v >= variance_e5x2(e, n, 0.0, 0.0) - 1e-15);
    }
}
