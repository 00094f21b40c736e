//! Multiplicity corrections over a family of p-values.
//!
//! Every procedure rejects only when `p` is strictly smaller than its
//! adjusted alpha (see [`rejects`]); a p-value equal to its threshold is retained.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anova::{omnibus_f, AnovaTable};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Every test at the nominal alpha.
    None,
    Bonferroni,
    /// Sequential (step-down) Bonferroni.
    Holm,
    /// Benjamini-Hochberg step-up.
    Bh,
    /// Individual tests only after a significant pooled F test.
    #[serde(rename = "omnibus")]
    OmnibusGate,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::None,
        Method::Bonferroni,
        Method::Holm,
        Method::Bh,
        Method::OmnibusGate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Bonferroni => "bonferroni",
            Method::Holm => "holm",
            Method::Bh => "bh",
            Method::OmnibusGate => "omnibus",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Method::None),
            "bonferroni" => Ok(Method::Bonferroni),
            "holm" | "seqb" => Ok(Method::Holm),
            "bh" | "fdr" => Ok(Method::Bh),
            "omnibus" | "omnibus_gate" => Ok(Method::OmnibusGate),
            _ => Err(Error::UnsupportedMethod(s.to_string())),
        }
    }
}

/// Labelled p-values, one per hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, f64)>", into = "Vec<(String, f64)>")]
pub struct PValueVector {
    entries: Vec<(String, f64)>,
}

impl PValueVector {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let entries: Vec<(String, f64)> = entries.into_iter().map(|(l, p)| (l.into(), p)).collect();
        let mut seen = HashSet::new();
        for (label, p) in &entries {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidPValues(format!(
                    "p-value {p} for `{label}` is outside [0, 1]"
                )));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidPValues(format!("duplicate label `{label}`")));
            }
        }
        Ok(Self { entries })
    }

    /// Unlabelled values get the labels `p1`, `p2`, ...
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(
            values
                .into_iter()
                .enumerate()
                .map(|(i, p)| (format!("p{}", i + 1), p)),
        )
    }

    pub fn from_table(table: &AnovaTable) -> Self {
        Self {
            entries: table.rows.iter().map(|r| (r.label.clone(), r.p)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn p_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, p)| *p)
    }

    /// Input positions ordered by ascending p; ties keep input order.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by(|&a, &b| self.entries[a].1.total_cmp(&self.entries[b].1));
        order
    }
}

impl TryFrom<Vec<(String, f64)>> for PValueVector {
    type Error = Error;

    fn try_from(entries: Vec<(String, f64)>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<PValueVector> for Vec<(String, f64)> {
    fn from(v: PValueVector) -> Self {
        v.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Rejected,
    Retained,
}

impl Decision {
    pub fn is_rejected(self) -> bool {
        self == Decision::Rejected
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Rejected => "rejected",
            Decision::Retained => "retained",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub label: String,
    pub p: f64,
    /// 1-based rank under ascending p.
    pub rank: usize,
    pub alpha_adj: f64,
    pub p_adj: f64,
    pub decision: Decision,
}

/// The pooled F test that gates the individual tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateStatus {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
    pub open: bool,
}

/// Per-hypothesis decisions of one procedure. Rows keep the input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTable {
    pub method: Method,
    pub alpha: f64,
    pub rows: Vec<DecisionRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gate: Option<GateStatus>,
}

impl DecisionTable {
    /// Rows in ascending-p order, the layout used for reporting.
    pub fn by_rank(&self) -> Vec<&DecisionRow> {
        let mut rows: Vec<&DecisionRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.rank);
        rows
    }

    pub fn rejected_labels(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.decision.is_rejected())
            .map(|r| r.label.as_str())
            .collect()
    }

    pub fn decision(&self, label: &str) -> Option<Decision> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.decision)
    }

    pub fn n_rejected(&self) -> usize {
        self.rows.iter().filter(|r| r.decision.is_rejected()).count()
    }
}

/// The one comparison every procedure uses.
#[inline]
pub fn rejects(p: f64, threshold: f64) -> bool {
    p < threshold
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("alpha", format!("{alpha} is outside (0, 1)")))
    }
}

fn holm_threshold(alpha: f64, m: usize, rank: usize) -> f64 {
    alpha / (m - rank + 1) as f64
}

// Written as alpha / (m / i) so that rank 1 gives exactly alpha / m and rank
// m exactly alpha, the same floats Bonferroni and Holm produce there.
fn bh_threshold(alpha: f64, m: usize, rank: usize) -> f64 {
    alpha / (m as f64 / rank as f64)
}

struct Ranked {
    order: Vec<usize>,
    rank_of: Vec<usize>,
}

fn rank(pv: &PValueVector) -> Ranked {
    let order = pv.ascending_order();
    let mut rank_of = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank_of[i] = r + 1;
    }
    Ranked { order, rank_of }
}

fn build_table(
    method: Method,
    alpha: f64,
    pv: &PValueVector,
    ranked: &Ranked,
    alpha_adj: impl Fn(usize) -> f64,
    rejected_by_rank: &[bool],
    p_adj: &[f64],
) -> DecisionTable {
    let rows = pv
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (label, p))| {
            let r = ranked.rank_of[i];
            DecisionRow {
                label: label.clone(),
                p: *p,
                rank: r,
                alpha_adj: alpha_adj(r),
                p_adj: p_adj[i],
                decision: if rejected_by_rank[r - 1] {
                    Decision::Rejected
                } else {
                    Decision::Retained
                },
            }
        })
        .collect();
    DecisionTable {
        method,
        alpha,
        rows,
        gate: None,
    }
}

/// Each p-value against the nominal alpha.
pub fn uncorrected_decisions(pv: &PValueVector, alpha: f64) -> Result<DecisionTable> {
    check_alpha(alpha)?;
    let ranked = rank(pv);
    let rejected: Vec<bool> = ranked
        .order
        .iter()
        .map(|&i| rejects(pv.entries()[i].1, alpha))
        .collect();
    let p_adj: Vec<f64> = pv.p_values().collect();
    Ok(build_table(Method::None, alpha, pv, &ranked, |_| alpha, &rejected, &p_adj))
}

/// Each p-value against alpha / m.
pub fn bonferroni_decisions(pv: &PValueVector, alpha: f64) -> Result<DecisionTable> {
    check_alpha(alpha)?;
    let m = pv.len();
    let ranked = rank(pv);
    let threshold = if m == 0 { alpha } else { alpha / m as f64 };
    let rejected: Vec<bool> = ranked
        .order
        .iter()
        .map(|&i| rejects(pv.entries()[i].1, threshold))
        .collect();
    let p_adj = adjusted(Method::Bonferroni, pv)?;
    Ok(build_table(
        Method::Bonferroni,
        alpha,
        pv,
        &ranked,
        |_| threshold,
        &rejected,
        &p_adj,
    ))
}

/// Sequential Bonferroni: scan upward from the smallest p-value, comparing
/// rank i with alpha / (m - i + 1); the first retention retains everything after it.
pub fn holm_decisions(pv: &PValueVector, alpha: f64) -> Result<DecisionTable> {
    check_alpha(alpha)?;
    let m = pv.len();
    let ranked = rank(pv);
    let mut rejected = vec![false; m];
    for (r, &i) in ranked.order.iter().enumerate() {
        if rejects(pv.entries()[i].1, holm_threshold(alpha, m, r + 1)) {
            rejected[r] = true;
        } else {
            break;
        }
    }
    let p_adj = adjusted(Method::Holm, pv)?;
    Ok(build_table(
        Method::Holm,
        alpha,
        pv,
        &ranked,
        |r| holm_threshold(alpha, m, r),
        &rejected,
        &p_adj,
    ))
}

/// Benjamini-Hochberg: scan downward from the largest p-value, comparing
/// rank i with alpha * i / m; the first rejection rejects everything before it.
pub fn bh_decisions(pv: &PValueVector, alpha: f64) -> Result<DecisionTable> {
    check_alpha(alpha)?;
    let m = pv.len();
    let ranked = rank(pv);
    let mut rejected = vec![false; m];
    for r in (1..=m).rev() {
        let i = ranked.order[r - 1];
        if rejects(pv.entries()[i].1, bh_threshold(alpha, m, r)) {
            rejected[..r].iter_mut().for_each(|x| *x = true);
            break;
        }
    }
    let p_adj = adjusted(Method::Bh, pv)?;
    Ok(build_table(
        Method::Bh,
        alpha,
        pv,
        &ranked,
        |r| bh_threshold(alpha, m, r),
        &rejected,
        &p_adj,
    ))
}

/// Tests each effect of a full-family table at alpha, but only when the
/// pooled F test rejects; otherwise every effect is retained.
///
/// The adjusted p-value of an effect is `max(p, omnibus p)`, which is below
/// alpha exactly when the gated procedure rejects it.
pub fn omnibus_gate(table: &AnovaTable, alpha: f64) -> Result<DecisionTable> {
    check_alpha(alpha)?;
    let omni = omnibus_f(table)?;
    let open = rejects(omni.p, alpha);
    let pv = PValueVector::from_table(table);
    let ranked = rank(&pv);
    let rejected: Vec<bool> = ranked
        .order
        .iter()
        .map(|&i| open && rejects(pv.entries()[i].1, alpha))
        .collect();
    let p_adj: Vec<f64> = pv.p_values().map(|p| p.max(omni.p)).collect();
    let mut out = build_table(
        Method::OmnibusGate,
        alpha,
        &pv,
        &ranked,
        |_| alpha,
        &rejected,
        &p_adj,
    );
    out.gate = Some(GateStatus {
        f: omni.f,
        df1: omni.df1,
        df2: omni.df2,
        p: omni.p,
        open,
    });
    Ok(out)
}

/// Decisions for any method that works from p-values alone.
pub fn decide(method: Method, pv: &PValueVector, alpha: f64) -> Result<DecisionTable> {
    match method {
        Method::None => uncorrected_decisions(pv, alpha),
        Method::Bonferroni => bonferroni_decisions(pv, alpha),
        Method::Holm => holm_decisions(pv, alpha),
        Method::Bh => bh_decisions(pv, alpha),
        Method::OmnibusGate => Err(Error::UnsupportedMethod(
            "omnibus (needs an ANOVA table, not bare p-values)".into(),
        )),
    }
}

/// Decisions for any method, over the rows of an ANOVA table.
pub fn decide_table(method: Method, table: &AnovaTable, alpha: f64) -> Result<DecisionTable> {
    match method {
        Method::OmnibusGate => omnibus_gate(table, alpha),
        other => decide(other, &PValueVector::from_table(table), alpha),
    }
}

/// Adjusted p-values in input order, in the style of R's `p.adjust`.
pub fn adjusted_pvalues(method: Method, pv: &PValueVector) -> Result<Vec<(String, f64)>> {
    let values = adjusted(method, pv)?;
    Ok(pv
        .entries()
        .iter()
        .zip(values)
        .map(|((l, _), q)| (l.clone(), q))
        .collect())
}

fn adjusted(method: Method, pv: &PValueVector) -> Result<Vec<f64>> {
    let m = pv.len();
    let mf = m as f64;
    let p: Vec<f64> = pv.p_values().collect();
    let mut out = vec![0.0; m];
    match method {
        Method::Bonferroni => {
            for (o, &pi) in out.iter_mut().zip(&p) {
                *o = (mf * pi).min(1.0);
            }
        }
        Method::Holm => {
            let order = pv.ascending_order();
            let mut running = 0.0f64;
            for (r, &i) in order.iter().enumerate() {
                let scaled = ((m - r) as f64 * p[i]).min(1.0);
                running = running.max(scaled);
                out[i] = running;
            }
        }
        Method::Bh => {
            let order = pv.ascending_order();
            let mut running = 1.0f64;
            for r in (1..=m).rev() {
                let i = order[r - 1];
                let scaled = (mf / r as f64 * p[i]).min(1.0);
                running = running.min(scaled);
                out[i] = running;
            }
        }
        Method::None | Method::OmnibusGate => {
            return Err(Error::UnsupportedMethod(method.as_str().into()))
        }
    }
    Ok(out)
}
