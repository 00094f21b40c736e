//! Named simulation scenarios, each runnable as a single command.

use famova_core::scenarios::{
    three_way_partial_null, two_by_three_global_null, ASYMPTOTIC_FWER_TOLERANCE,
    DEPENDENT_FWER_LOWER, DEPENDENT_FWER_UPPER,
};
use famova_core::sim::DEFAULT_REPLICATIONS;
use famova_core::{independence_bound, Method, SimConfig, SimResult};

use crate::error::{CliError, CoreResultExt};
use crate::report::Check;

pub const PRESETS: [(&str, &str); 4] = [
    (
        "paper-2x3-allnull",
        "2x3 design, 6 per cell, every null true; uncorrected FWER should sit just below 1 - 0.95^3",
    ),
    (
        "paper-2x3-allnull-n100",
        "2x3 design, 100 per cell, every null true; uncorrected FWER should approach 1 - 0.95^3",
    ),
    (
        "paper-2x2x2-partial",
        "2x2x2 design, 10 per cell, one main effect of 3 sd; FWER over the six null effects",
    ),
    (
        "paper-bound-table",
        "family-wise error bound for independent tests at m = 3, 7, 15 (no simulation)",
    ),
];

pub const BOUND_TABLE_SIZES: [usize; 3] = [3, 7, 15];

pub enum Preset {
    Simulation(SimConfig),
    BoundTable,
}

pub fn lookup(name: &str, seed: u64) -> Result<Preset, CliError> {
    let all = Method::ALL.to_vec();
    let config = match name {
        "paper-2x3-allnull" => two_by_three_global_null(6, all, DEFAULT_REPLICATIONS, seed),
        "paper-2x3-allnull-n100" => two_by_three_global_null(100, all, DEFAULT_REPLICATIONS, seed),
        "paper-2x2x2-partial" => three_way_partial_null(3.0, 10, all, 100_000, seed),
        "paper-bound-table" => return Ok(Preset::BoundTable),
        _ => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            return Err(CliError::validation(
                "preset",
                format!("unknown preset `{name}`; expected one of {}", names.join(", ")),
            ));
        }
    };
    Ok(Preset::Simulation(config.field("preset")?))
}

/// Pass/fail checks attached to a preset's simulation result.
pub fn checks(name: &str, result: &SimResult) -> Result<Vec<Check>, CliError> {
    let bound3 = independence_bound(3, result.alpha).field("alpha")?;
    let mut out = Vec::new();
    match name {
        "paper-2x3-allnull" => {
            if let Some(s) = result.method(Method::None) {
                out.push(Check::new(
                    "uncorrected FWER in band",
                    s.fwer_hat > DEPENDENT_FWER_LOWER && s.fwer_hat < DEPENDENT_FWER_UPPER,
                    format!(
                        "{:.4} in ({DEPENDENT_FWER_LOWER}, {DEPENDENT_FWER_UPPER}); independence bound {bound3:.6}",
                        s.fwer_hat
                    ),
                ));
            }
            control_checks(result, &mut out);
        }
        "paper-2x3-allnull-n100" => {
            if let Some(s) = result.method(Method::None) {
                out.push(Check::new(
                    "uncorrected FWER near independence bound",
                    (s.fwer_hat - bound3).abs() <= ASYMPTOTIC_FWER_TOLERANCE,
                    format!(
                        "|{:.4} - {bound3:.6}| <= {ASYMPTOTIC_FWER_TOLERANCE}",
                        s.fwer_hat
                    ),
                ));
            }
            control_checks(result, &mut out);
        }
        "paper-2x2x2-partial" => {
            if let Some(s) = result.method(Method::OmnibusGate) {
                out.push(Check::new(
                    "omnibus gate FWER exceeds 0.10",
                    s.fwer_hat > 0.10,
                    format!("{:.4} over {} null effects", s.fwer_hat, result.null_effects.len()),
                ));
            }
            control_checks(result, &mut out);
        }
        _ => {}
    }
    Ok(out)
}

/// Holm FWER and BH FDR should stay within three standard errors of alpha.
fn control_checks(result: &SimResult, out: &mut Vec<Check>) {
    if let Some(s) = result.method(Method::Holm) {
        let limit = result.alpha + 3.0 * s.fwer_se;
        out.push(Check::new(
            "holm FWER controlled",
            s.fwer_hat <= limit,
            format!("{:.4} <= {limit:.4}", s.fwer_hat),
        ));
    }
    if let Some(s) = result.method(Method::Bh) {
        // FDP lies in [0, 1], so its variance is at most FDR * (1 - FDR).
        let se = (s.fdr_hat * (1.0 - s.fdr_hat) / result.replications as f64).sqrt();
        let limit = result.alpha + 3.0 * se;
        out.push(Check::new(
            "bh FDR controlled",
            s.fdr_hat <= limit,
            format!("{:.4} <= {limit:.4}", s.fdr_hat),
        ));
    }
}
