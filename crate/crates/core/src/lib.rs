//! Balanced factorial ANOVA with multiplicity corrections over the family
//! of main effects and interactions, plus Monte Carlo checks of the
//! resulting error rates.

pub mod anova;
pub mod corrections;
pub mod design;
pub mod error;
pub mod scenarios;
pub mod sim;
pub mod special;
pub mod sum;

pub use anova::{
    anova_table, cell_means, effect_contrasts, effect_ss, full_anova_table, omnibus_f, AnovaRow,
    AnovaTable, CellMeans, Dataset, OmnibusF,
};
pub use corrections::{
    adjusted_pvalues, bh_decisions, bonferroni_decisions, decide, decide_table, holm_decisions,
    omnibus_gate, rejects, uncorrected_decisions, Decision, DecisionRow, DecisionTable,
    GateStatus, Method, PValueVector,
};
pub use design::{
    enumerate_effects, independence_bound, resolve_family, Design, EffectId, Factor, FamilySpec,
};
pub use error::{Error, Result};
pub use sim::{
    classify_true_effects, run_replicate, simulate, simulate_with_workers, MethodSummary,
    ReplicateOutcome, SimConfig, SimResult, TrueEffects,
};
pub use special::{f_sf, log_gamma, reg_inc_beta, FTestInput};
