use famova_core::scenarios::{three_way_partial_null, two_by_three_global_null};
use famova_core::{
    classify_true_effects, full_anova_table, omnibus_gate, run_replicate, simulate,
    simulate_with_workers, Dataset, Design, Method, SimConfig,
};

const ALL_METHODS: [Method; 5] = [
    Method::None,
    Method::Bonferroni,
    Method::Holm,
    Method::Bh,
    Method::OmnibusGate,
];

#[test]
fn result_is_identical_across_worker_counts() {
    let config = three_way_partial_null(1.0, 4, ALL_METHODS.to_vec(), 3_000, 99).unwrap();
    let one = simulate_with_workers(&config, 1).unwrap();
    let three = simulate_with_workers(&config, 3).unwrap();
    let eight = simulate_with_workers(&config, 8).unwrap();
    assert_eq!(format!("{one:?}"), format!("{three:?}"));
    assert_eq!(format!("{one:?}"), format!("{eight:?}"));
    assert_eq!(one, simulate(&config).unwrap());
}

#[test]
fn different_seeds_give_different_estimates() {
    let a = two_by_three_global_null(6, vec![Method::None], 2_000, 1).unwrap();
    let mut b = a.clone();
    b.seed = 2;
    assert_ne!(simulate(&a).unwrap(), simulate(&b).unwrap());
}

#[test]
fn global_null_fdr_equals_fwer() {
    let config = two_by_three_global_null(4, ALL_METHODS.to_vec(), 5_000, 3).unwrap();
    let result = simulate(&config).unwrap();
    assert!(result.non_null_effects.is_empty());
    for s in &result.methods {
        assert_eq!(s.fdr_hat.to_bits(), s.fwer_hat.to_bits(), "{}", s.method);
        assert!(s.power.is_empty());
    }
}

#[test]
fn rejection_sets_nest_in_every_replicate() {
    let config = three_way_partial_null(0.7, 3, ALL_METHODS.to_vec(), 1, 5).unwrap();
    for i in 0..2_000 {
        let out = run_replicate(&config, i).unwrap();
        let bonf = out.rejected(Method::Bonferroni).unwrap();
        let holm = out.rejected(Method::Holm).unwrap();
        let bh = out.rejected(Method::Bh).unwrap();
        let none = out.rejected(Method::None).unwrap();
        for j in 0..out.effects.len() {
            assert!(!bonf[j] || holm[j]);
            assert!(!holm[j] || bh[j]);
            assert!(!bh[j] || none[j]);
        }
    }
}

#[test]
fn single_effect_family_has_nominal_error_rate() {
    let design = Design::from_levels([("A", 3)], 5).unwrap();
    let config = SimConfig::global_null(design, 0.05, vec![Method::None, Method::OmnibusGate], 40_000, 8);
    let r = simulate(&config).unwrap();
    let none = r.method(Method::None).unwrap();
    assert!((none.fwer_hat - 0.05).abs() <= 3.0 * none.fwer_se, "{}", none.fwer_hat);
    // With one effect the gate is the test itself.
    assert_eq!(r.method(Method::OmnibusGate).unwrap().fwer_hat, none.fwer_hat);
}

#[test]
fn huge_noise_without_effects_rejects_near_alpha() {
    let design = Design::from_levels([("A", 2), ("B", 2)], 4).unwrap();
    let mut config = SimConfig::global_null(design, 0.05, vec![Method::None], 20_000, 21);
    config.sigma = 1e6;
    let r = simulate(&config).unwrap();
    for rate in &r.method(Method::None).unwrap().rejection_rates {
        let se = (0.05f64 * 0.95 / 20_000.0).sqrt();
        assert!((rate.rate - 0.05).abs() <= 4.0 * se, "{}: {}", rate.label, rate.rate);
    }
}

#[test]
fn partial_null_classification_and_power() {
    let config = three_way_partial_null(3.0, 10, vec![Method::Holm], 2_000, 4).unwrap();
    let truth = classify_true_effects(&config).unwrap();
    assert_eq!(truth.null.len(), 6);
    let r = simulate(&config).unwrap();
    assert_eq!(r.non_null_effects, ["A"]);
    assert!(r.method(Method::Holm).unwrap().power[0].rate > 0.999);
}

#[test]
fn proportions_and_standard_errors_are_consistent() {
    let config = three_way_partial_null(0.5, 3, ALL_METHODS.to_vec(), 2_000, 6).unwrap();
    let r = simulate(&config).unwrap();
    for s in &r.methods {
        for v in [s.fwer_hat, s.fdr_hat] {
            assert!((0.0..=1.0).contains(&v));
        }
        let se = (s.fwer_hat * (1.0 - s.fwer_hat) / 2_000.0).sqrt();
        assert_eq!(s.fwer_se, se);
        assert_eq!(s.fwer_hat, s.false_rejection_replicates as f64 / 2_000.0);
        assert!(s.fdr_hat <= s.fwer_hat);
    }
}

fn hand_dataset() -> Dataset {
    let design = Design::from_levels([("A", 2), ("B", 2)], 2).unwrap();
    Dataset::from_cells(
        design,
        vec![vec![1.0, 3.0], vec![3.0, 5.0], vec![5.0, 7.0], vec![7.0, 9.0]],
    )
    .unwrap()
}

#[test]
fn gate_opens_for_hand_dataset() {
    let table = full_anova_table(&hand_dataset()).unwrap();
    let gated = omnibus_gate(&table, 0.05).unwrap();
    let gate = gated.gate.unwrap();
    assert!(gate.open);
    assert_eq!((gate.df1, gate.df2), (3, 4));
    assert!((gate.f - 20.0 / 3.0).abs() < 1e-12);
    for (row, t) in gated.rows.iter().zip(&table.rows) {
        assert_eq!(row.decision.is_rejected(), t.p < 0.05);
    }
}

#[test]
fn closed_gate_retains_everything() {
    // Only A carries signal and the pooled test over three effects at alpha = .01 fails,
    // although A alone would pass at that level.
    let design = Design::from_levels([("A", 2), ("B", 2)], 3).unwrap();
    let ds = Dataset::from_cells(
        design,
        vec![
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.0],
            vec![1.95, 2.95, 3.95],
            vec![1.95, 2.95, 3.95],
        ],
    )
    .unwrap();
    let table = full_anova_table(&ds).unwrap();
    let a = &table.rows[0];
    let gated = omnibus_gate(&table, 0.01).unwrap();
    let gate = gated.gate.unwrap();
    assert!(a.p < 0.01, "A p = {}", a.p);
    assert!(gate.p >= 0.01, "gate p = {}", gate.p);
    assert!(!gate.open);
    assert_eq!(gated.n_rejected(), 0);
    assert!(gated.rows.iter().all(|r| r.p_adj >= gate.p));
}
