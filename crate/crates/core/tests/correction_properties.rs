use std::collections::BTreeSet;

use famova_core::{
    adjusted_pvalues, bh_decisions, bonferroni_decisions, decide, holm_decisions, Decision,
    DecisionTable, Method, PValueVector,
};
use proptest::prelude::*;

const ALPHA: f64 = 0.05;

fn p_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        // Continuous values, concentrated where decisions change.
        3 => 0.0..0.2f64,
        1 => 0.0..=1.0f64,
        // Four-decimal values, as published tables report them; these produce ties.
        1 => (0u32..=10_000).prop_map(|k| k as f64 / 10_000.0),
    ]
}

fn p_vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(p_value(), 1..=20)
}

fn rejected(t: &DecisionTable) -> BTreeSet<String> {
    t.rejected_labels().into_iter().map(String::from).collect()
}

fn by_rank(t: &DecisionTable) -> Vec<Decision> {
    t.by_rank().into_iter().map(|r| r.decision).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn stop_rules_agree_with_adjusted_p(values in p_vector()) {
        let pv = PValueVector::from_values(values).unwrap();
        for method in [Method::Bonferroni, Method::Holm, Method::Bh] {
            let table = decide(method, &pv, ALPHA).unwrap();
            let adjusted = adjusted_pvalues(method, &pv).unwrap();
            for (row, (label, q)) in table.rows.iter().zip(&adjusted) {
                prop_assert_eq!(&row.label, label);
                prop_assert_eq!(row.p_adj, *q);
                prop_assert_eq!(row.decision.is_rejected(), *q < ALPHA, "{} {}", method, label);
            }
        }
    }

    #[test]
    fn bonferroni_within_holm_within_bh(values in p_vector()) {
        let pv = PValueVector::from_values(values).unwrap();
        let bonf = rejected(&bonferroni_decisions(&pv, ALPHA).unwrap());
        let holm = rejected(&holm_decisions(&pv, ALPHA).unwrap());
        let bh = rejected(&bh_decisions(&pv, ALPHA).unwrap());
        prop_assert!(bonf.is_subset(&holm));
        prop_assert!(holm.is_subset(&bh));
    }

    #[test]
    fn lowering_one_p_never_shrinks_rejections(
        values in p_vector(),
        pick in any::<prop::sample::Index>(),
        factor in 0.0..1.0f64,
    ) {
        let before = PValueVector::from_values(values.clone()).unwrap();
        let mut lowered = values;
        let i = pick.index(lowered.len());
        lowered[i] *= factor;
        let after = PValueVector::from_values(lowered).unwrap();
        for method in [Method::None, Method::Bonferroni, Method::Holm, Method::Bh] {
            let a = rejected(&decide(method, &before, ALPHA).unwrap());
            let b = rejected(&decide(method, &after, ALPHA).unwrap());
            prop_assert!(a.is_subset(&b), "{}", method);
        }
    }

    #[test]
    fn decisions_do_not_depend_on_input_order(values in p_vector(), seed in any::<u64>()) {
        let labelled: Vec<(String, f64)> =
            values.iter().enumerate().map(|(i, p)| (format!("h{i}"), *p)).collect();
        let mut shuffled = labelled.clone();
        // Deterministic Fisher-Yates driven by the proptest seed.
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = PValueVector::new(labelled).unwrap();
        let b = PValueVector::new(shuffled).unwrap();
        for method in [Method::None, Method::Bonferroni, Method::Holm, Method::Bh] {
            let ta = decide(method, &a, ALPHA).unwrap();
            let tb = decide(method, &b, ALPHA).unwrap();
            for row in &ta.rows {
                prop_assert_eq!(Some(row.decision), tb.decision(&row.label));
            }
        }
    }

    #[test]
    fn holm_retains_a_suffix_and_bh_rejects_a_prefix(values in p_vector()) {
        let pv = PValueVector::from_values(values).unwrap();
        let holm = by_rank(&holm_decisions(&pv, ALPHA).unwrap());
        if let Some(first_kept) = holm.iter().position(|d| !d.is_rejected()) {
            prop_assert!(holm[first_kept..].iter().all(|d| !d.is_rejected()));
        }
        let bh = by_rank(&bh_decisions(&pv, ALPHA).unwrap());
        if let Some(last_rejected) = bh.iter().rposition(|d| d.is_rejected()) {
            prop_assert!(bh[..=last_rejected].iter().all(|d| d.is_rejected()));
        }
    }

    #[test]
    fn thresholds_follow_their_formulas(values in p_vector()) {
        let pv = PValueVector::from_values(values).unwrap();
        let m = pv.len() as f64;
        let ranks: Vec<usize> = holm_decisions(&pv, ALPHA).unwrap().rows.iter().map(|r| r.rank).collect();
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=pv.len()).collect::<Vec<_>>());
        for r in &holm_decisions(&pv, ALPHA).unwrap().rows {
            prop_assert!((r.alpha_adj - ALPHA / (m - r.rank as f64 + 1.0)).abs() < 1e-15);
        }
        for r in &bh_decisions(&pv, ALPHA).unwrap().rows {
            prop_assert!((r.alpha_adj - ALPHA * r.rank as f64 / m).abs() < 1e-15);
        }
        for r in &bonferroni_decisions(&pv, ALPHA).unwrap().rows {
            prop_assert!((r.alpha_adj - ALPHA / m).abs() < 1e-15);
        }
        for r in &decide(Method::None, &pv, ALPHA).unwrap().rows {
            prop_assert_eq!(r.alpha_adj, ALPHA);
        }
    }

    #[test]
    fn adjusted_values_are_probabilities_at_least_p(values in p_vector()) {
        let pv = PValueVector::from_values(values).unwrap();
        for method in [Method::Bonferroni, Method::Holm, Method::Bh] {
            for ((_, p), (_, q)) in pv.entries().iter().zip(adjusted_pvalues(method, &pv).unwrap()) {
                prop_assert!(q >= *p && q <= 1.0);
            }
        }
    }
}
