//! Property tests of the significance tests: symmetry, monotonicity, and
//! the equivalence of the two published routes to the compressed
//! block-regularized statistic.

use blockcv::contingency::{effective_table, AveragedTable, ContingencyTable};
use blockcv::significance::{
    combined_f_5x2cv, mcnemar_bcv_5x2, mcnemar_bcv_general, mcnemar_ho, paired_t_5x2cv,
    paired_t_kfold, proportional_z, TestStatus,
};
use proptest::prelude::*;

const ALPHA: f64 = 0.05;

fn table() -> impl Strategy<Value = ContingencyTable> {
    (0u64..300, 0u64..300, 0u64..300, 0u64..300)
        .prop_map(|(n00, n01, n10, n11)| ContingencyTable { n00, n01, n10, n11 })
}

fn averaged() -> impl Strategy<Value = AveragedTable> {
    (0u64..2000, 0u64..300, 0u64..300, 0u64..2000).prop_map(|(a, b, c, d)| AveragedTable {
        nbar00: a as f64 / 10.0,
        nbar01: b as f64 / 10.0,
        nbar10: c as f64 / 10.0,
        nbar11: d as f64 / 10.0,
    })
}

fn diffs() -> impl Strategy<Value = [[f64; 2]; 5]> {
    proptest::array::uniform5(proptest::array::uniform2(-0.5f64..0.5))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    /// Swapping the two algorithms leaves every symmetric test's decision
    /// unchanged (the hold-out statistic is built from |n01 - n10|).
    #[test]
    fn mcnemar_ho_is_swap_symmetric(t in table()) {
        let swapped = ContingencyTable { n00: t.n00, n01: t.n10, n10: t.n01, n11: t.n11 };
        let (a, b) = (mcnemar_ho(&t, ALPHA), mcnemar_ho(&swapped, ALPHA));
        prop_assert_eq!(a.statistic, b.statistic);
        prop_assert_eq!(a.p_value, b.p_value);
        prop_assert_eq!(a.reject, b.reject);
    }

    /// A decision exists iff there are disagreements, and `reject` always
    /// matches `p < alpha`.
    #[test]
    fn mcnemar_ho_decision_is_consistent(t in table(), alpha in 0.001f64..0.5) {
        let r = mcnemar_ho(&t, alpha);
        if t.n01 + t.n10 == 0 {
            prop_assert!(matches!(r.status, TestStatus::NoDisagreement));
            prop_assert!(!r.reject);
            prop_assert!(r.p_value.is_none());
        } else {
            let p = r.p_value.expect("testable input");
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(r.statistic.expect("testable input") >= 0.0);
            prop_assert_eq!(r.reject, p < alpha);
        }
    }

    /// For a fixed disagreement mass the hold-out statistic grows with the
    /// split of that mass, once past the continuity correction.
    #[test]
    fn mcnemar_ho_statistic_is_monotone_in_the_gap(
        mass in 2u64..400,
        base in 0u64..200,
    ) {
        let mut last = -1.0;
        for n01 in (mass.div_ceil(2) + 1)..=mass {
            let t = ContingencyTable { n00: base, n01, n10: mass - n01, n11: base };
            let stat = mcnemar_ho(&t, ALPHA).statistic.expect("mass >= 2");
            prop_assert!(stat >= last, "stat dropped at n01 = {}", n01);
            last = stat;
        }
    }

    /// The two published routes to the compressed statistic agree: scaling
    /// the averaged cells into the effective table and applying the plain
    /// corrected form equals the direct compressed formula.
    #[test]
    fn bcv_general_matches_the_effective_route(
        avg in averaged(),
        rho1 in 0.0f64..1.0,
        rho2 in 0.0f64..0.5,
    ) {
        prop_assume!(avg.nbar01 + avg.nbar10 > 0.0);
        let direct = mcnemar_bcv_general(&avg, rho1, rho2, ALPHA).unwrap();

        let eff = effective_table(&avg, rho1, rho2, 64).unwrap();
        let d = (eff.ne01 - eff.ne10).abs() - 1.0;
        let via_effective = d * d / (eff.ne01 + eff.ne10);

        let stat = direct.statistic.expect("positive disagreement mass");
        prop_assert!(
            rel_close(stat, via_effective, 1e-12),
            "direct {} vs effective {}",
            stat,
            via_effective
        );
    }

    /// The calibrated 5x2 test is the general test pinned at the
    /// conservative corner rho1 = rho2 = 1/2.
    #[test]
    fn bcv_5x2_is_the_calibrated_corner(avg in averaged()) {
        let fixed = mcnemar_bcv_5x2(&avg, ALPHA);
        let general = mcnemar_bcv_general(&avg, 0.5, 0.5, ALPHA).unwrap();
        prop_assert_eq!(fixed.statistic, general.statistic);
        prop_assert_eq!(fixed.p_value, general.p_value);
        prop_assert_eq!(fixed.reject, general.reject);
    }

    /// Once the corrected gap is positive, the compressed statistic grows
    /// with the cell gap at fixed disagreement mass.
    #[test]
    fn bcv_statistic_is_monotone_in_the_gap(
        mass in 2u64..60,
        shift in 0u64..30,
    ) {
        // Gaps start past the continuity correction 11/20.
        let mass = mass as f64;
        let mut last = -1.0;
        let steps = 12;
        for s in 0..=steps {
            let gap = 0.55 + (s as f64 / steps as f64) * (mass - 0.55).max(0.0);
            prop_assume!(gap <= mass);
            let nbar01 = (mass + gap) / 2.0;
            let nbar10 = (mass - gap) / 2.0;
            let avg = AveragedTable {
                nbar00: shift as f64,
                nbar01,
                nbar10,
                nbar11: shift as f64 + 5.0,
            };
            let stat = mcnemar_bcv_5x2(&avg, ALPHA).statistic.expect("positive mass");
            prop_assert!(stat >= last - 1e-12, "stat dropped at gap = {}", gap);
            last = stat;
        }
    }

    /// Negating every per-fold difference flips nothing observable in the
    /// squared-statistic tests and only the sign of the paired t.
    #[test]
    fn paired_tests_are_sign_symmetric(d in diffs()) {
        let neg = d.map(|row| row.map(|v| -v));

        match (paired_t_5x2cv(&d, ALPHA), paired_t_5x2cv(&neg, ALPHA)) {
            (Ok(a), Ok(b)) => {
                let (sa, sb) = (a.statistic.unwrap(), b.statistic.unwrap());
                prop_assert!(rel_close(sa, -sb, 1e-12), "{} vs {}", sa, sb);
                prop_assert_eq!(a.p_value, b.p_value);
                prop_assert_eq!(a.reject, b.reject);
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric outcome: {:?}", other),
        }

        match (combined_f_5x2cv(&d, ALPHA), combined_f_5x2cv(&neg, ALPHA)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.statistic, b.statistic, "F is built from squares");
                prop_assert_eq!(a.p_value, b.p_value);
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric outcome: {:?}", other),
        }
    }

    /// Same for the K-fold paired t over a free-length difference vector.
    #[test]
    fn paired_t_kfold_is_sign_symmetric(
        d in proptest::collection::vec(-0.5f64..0.5, 2..25)
    ) {
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        match (paired_t_kfold(&d, ALPHA), paired_t_kfold(&neg, ALPHA)) {
            (Ok(a), Ok(b)) => {
                let (sa, sb) = (a.statistic.unwrap(), b.statistic.unwrap());
                prop_assert!(rel_close(sa, -sb, 1e-12));
                prop_assert_eq!(a.p_value, b.p_value);
                prop_assert_eq!(a.reject, b.reject);
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric outcome: {:?}", other),
        }
    }

    /// The pooled z statistic is antisymmetric in the two error counts and
    /// keeps its two-sided p-value; p and reject stay consistent.
    #[test]
    fn proportional_z_is_antisymmetric(
        err_a in 0u64..200,
        err_b in 0u64..200,
        extra in 1u64..300,
        alpha in 0.001f64..0.5,
    ) {
        let n2 = err_a.max(err_b) + extra;
        let a = proportional_z(err_a, err_b, n2, alpha).unwrap();
        let b = proportional_z(err_b, err_a, n2, alpha).unwrap();
        match (a.statistic, b.statistic) {
            (Some(sa), Some(sb)) => {
                prop_assert!(rel_close(sa, -sb, 1e-12));
                let p = a.p_value.expect("computed statistic has a p");
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert_eq!(a.p_value, b.p_value);
                prop_assert_eq!(a.reject, p < alpha);
            }
            (None, None) => {
                prop_assert!(matches!(a.status, TestStatus::Degenerate));
                prop_assert!(!a.reject && !b.reject);
            }
            other => prop_assert!(false, "asymmetric outcome: {:?}", other),
        }
    }
}
