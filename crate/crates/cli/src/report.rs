//! Report assembly and rendering as text tables, JSON or long-format CSV.

use std::fmt::Write as _;

use famova_core::{AnovaTable, DecisionTable, OmnibusF, SimResult};
use serde::Serialize;

use crate::args::Format;

/// Everything a run produced. Absent parts serialize as `null`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub anova_table: Option<AnovaTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omnibus: Option<OmnibusF>,
    pub decisions: Vec<DecisionTable>,
    pub simulation: Option<SimulationReport>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SimulationReport {
    pub preset: Option<String>,
    pub result: Option<SimResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<BoundRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub m: usize,
    pub alpha: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl Report {
    pub fn all_checks_passed(&self) -> bool {
        self.simulation
            .as_ref()
            .is_none_or(|s| s.checks.iter().all(|c| c.passed))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => render_text(self),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => render_csv(self),
        }
    }
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Aligned plain-text table: the first `left` columns are left-aligned,
/// the rest right-aligned.
fn table(headers: &[String], rows: &[Vec<String>], left: usize) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i < left {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(headers);
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    if let Some(t) = &report.anova_table {
        out.push_str(&anova_text(t, report.omnibus.as_ref()));
    }
    for d in &report.decisions {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&decision_text(d));
    }
    if report.decisions.len() > 1 {
        out.push('\n');
        out.push_str(&summary_text(&report.decisions));
    }
    if let Some(s) = &report.simulation {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&simulation_text(s));
    }
    out
}

fn anova_text(t: &AnovaTable, omnibus: Option<&OmnibusF>) -> String {
    let mut rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                fmt4(r.ss),
                r.df.to_string(),
                fmt4(r.ms),
                fmt4(r.f),
                fmt4(r.p),
            ]
        })
        .collect();
    rows.push(vec![
        "Error".into(),
        fmt4(t.error_ss),
        t.error_df.to_string(),
        fmt4(t.mse),
        String::new(),
        String::new(),
    ]);
    rows.push(vec![
        "Total".into(),
        fmt4(t.total_ss),
        t.total_df.to_string(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let mut out = format!("ANOVA table (N = {})\n", t.total_df + 1);
    out.push_str(&table(&strings(&["Effect", "SS", "df", "MS", "F", "p"]), &rows, 1));
    if let Some(o) = omnibus {
        let _ = writeln!(
            out,
            "Omnibus: F({}, {}) = {}, p = {}",
            o.df1,
            o.df2,
            fmt4(o.f),
            fmt4(o.p)
        );
    }
    out
}

fn decision_text(d: &DecisionTable) -> String {
    let mut out = format!(
        "Decisions: {} (alpha = {}, m = {})\n",
        d.method,
        d.alpha,
        d.rows.len()
    );
    let rows: Vec<Vec<String>> = d
        .by_rank()
        .into_iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                r.label.clone(),
                fmt4(r.p),
                fmt4(r.alpha_adj),
                fmt4(r.p_adj),
                r.decision.to_string(),
            ]
        })
        .collect();
    out.push_str(&table(
        &strings(&["Rank", "Effect", "p", "alpha_adj", "p_adj", "H0"]),
        &rows,
        2,
    ));
    if let Some(g) = &d.gate {
        let _ = writeln!(
            out,
            "Gate: F({}, {}) = {}, p = {}, {}",
            g.df1,
            g.df2,
            fmt4(g.f),
            fmt4(g.p),
            if g.open { "open" } else { "closed" }
        );
    }
    out
}

/// Side-by-side view of every method, rows in ascending-p order.
fn summary_text(decisions: &[DecisionTable]) -> String {
    let first = &decisions[0];
    let mut headers = strings(&["Effect", "p"]);
    for d in decisions {
        headers.push(format!("alpha_adj {}", d.method));
    }
    for d in decisions {
        headers.push(format!("H0 {}", d.method));
    }
    let rows: Vec<Vec<String>> = first
        .by_rank()
        .into_iter()
        .map(|r| {
            let mut row = vec![r.label.clone(), fmt4(r.p)];
            let found: Vec<_> = decisions
                .iter()
                .map(|d| d.rows.iter().find(|x| x.label == r.label))
                .collect();
            row.extend(found.iter().map(|x| x.map_or(String::new(), |x| fmt4(x.alpha_adj))));
            row.extend(found.iter().map(|x| x.map_or(String::new(), |x| x.decision.to_string())));
            row
        })
        .collect();
    let mut out = String::from("Summary\n");
    out.push_str(&table(&headers, &rows, 1));
    out
}

fn simulation_text(s: &SimulationReport) -> String {
    let mut out = String::new();
    if let Some(p) = &s.preset {
        let _ = writeln!(out, "Preset: {p}");
    }
    if let Some(r) = &s.result {
        let design: Vec<String> = r
            .design
            .factors()
            .iter()
            .map(|f| format!("{}({})", f.name, f.levels))
            .collect();
        let list = |v: &[String]| if v.is_empty() { "none".to_string() } else { v.join(", ") };
        let _ = writeln!(
            out,
            "Design: {}, n = {} per cell, sigma = {}, alpha = {}",
            design.join(" x "),
            r.design.n_per_cell(),
            r.sigma,
            r.alpha
        );
        let _ = writeln!(
            out,
            "Replications: {}, seed: {}, redraws: {}",
            r.replications, r.seed, r.redraws
        );
        let _ = writeln!(out, "Null effects: {}", list(&r.null_effects));
        let _ = writeln!(out, "Non-null effects: {}", list(&r.non_null_effects));
        let rows: Vec<Vec<String>> = r
            .methods
            .iter()
            .map(|m| {
                vec![
                    m.method.to_string(),
                    fmt4(m.fwer_hat),
                    fmt4(m.fwer_se),
                    fmt4(m.fdr_hat),
                ]
            })
            .collect();
        out.push_str(&table(&strings(&["Method", "FWER", "SE", "FDR"]), &rows, 1));
        if !r.non_null_effects.is_empty() {
            let mut headers = strings(&["Power"]);
            headers.extend(r.non_null_effects.iter().cloned());
            let rows: Vec<Vec<String>> = r
                .methods
                .iter()
                .map(|m| {
                    let mut row = vec![m.method.to_string()];
                    row.extend(m.power.iter().map(|e| fmt4(e.rate)));
                    row
                })
                .collect();
            out.push_str(&table(&headers, &rows, 1));
        }
    }
    if !s.bounds.is_empty() {
        let rows: Vec<Vec<String>> = s
            .bounds
            .iter()
            .map(|b| vec![b.m.to_string(), b.alpha.to_string(), format!("{:.7}", b.bound)])
            .collect();
        out.push_str("Family-wise error for independent tests: 1 - (1 - alpha)^m\n");
        out.push_str(&table(&strings(&["m", "alpha", "bound"]), &rows, 0));
    }
    for c in &s.checks {
        let _ = writeln!(
            out,
            "{}  {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    out
}

fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |section: &str, method: &str, effect: &str, field: &str, value: String| {
        w.write_record([section, method, effect, field, value.as_str()])
            .expect("in-memory write");
    };
    row("section", "method", "effect", "field", "value".into());
    if let Some(t) = &report.anova_table {
        for r in &t.rows {
            row("anova", "", &r.label, "ss", r.ss.to_string());
            row("anova", "", &r.label, "df", r.df.to_string());
            row("anova", "", &r.label, "ms", r.ms.to_string());
            row("anova", "", &r.label, "f", r.f.to_string());
            row("anova", "", &r.label, "p", r.p.to_string());
        }
        row("anova", "", "Error", "ss", t.error_ss.to_string());
        row("anova", "", "Error", "df", t.error_df.to_string());
        row("anova", "", "Error", "ms", t.mse.to_string());
        row("anova", "", "Total", "ss", t.total_ss.to_string());
        row("anova", "", "Total", "df", t.total_df.to_string());
    }
    if let Some(o) = &report.omnibus {
        row("omnibus", "", "", "f", o.f.to_string());
        row("omnibus", "", "", "df1", o.df1.to_string());
        row("omnibus", "", "", "df2", o.df2.to_string());
        row("omnibus", "", "", "p", o.p.to_string());
    }
    for d in &report.decisions {
        let m = d.method.as_str();
        row("decision", m, "", "alpha", d.alpha.to_string());
        for r in d.by_rank() {
            row("decision", m, &r.label, "p", r.p.to_string());
            row("decision", m, &r.label, "rank", r.rank.to_string());
            row("decision", m, &r.label, "alpha_adj", r.alpha_adj.to_string());
            row("decision", m, &r.label, "p_adj", r.p_adj.to_string());
            row("decision", m, &r.label, "decision", r.decision.to_string());
        }
        if let Some(g) = &d.gate {
            row("decision", m, "", "gate_f", g.f.to_string());
            row("decision", m, "", "gate_p", g.p.to_string());
            row("decision", m, "", "gate_open", g.open.to_string());
        }
    }
    if let Some(s) = &report.simulation {
        if let Some(p) = &s.preset {
            row("simulation", "", "", "preset", p.clone());
        }
        if let Some(r) = &s.result {
            row("simulation", "", "", "replications", r.replications.to_string());
            row("simulation", "", "", "seed", r.seed.to_string());
            row("simulation", "", "", "sigma", r.sigma.to_string());
            row("simulation", "", "", "alpha", r.alpha.to_string());
            row("simulation", "", "", "redraws", r.redraws.to_string());
            for m in &r.methods {
                let name = m.method.as_str();
                row("simulation", name, "", "fwer", m.fwer_hat.to_string());
                row("simulation", name, "", "fwer_se", m.fwer_se.to_string());
                row("simulation", name, "", "fdr", m.fdr_hat.to_string());
                for e in &m.rejection_rates {
                    row("simulation", name, &e.label, "rejection_rate", e.rate.to_string());
                }
                for e in &m.power {
                    row("simulation", name, &e.label, "power", e.rate.to_string());
                }
            }
        }
        for b in &s.bounds {
            row("bound", "", "", &format!("m={}", b.m), b.bound.to_string());
        }
        for c in &s.checks {
            row("check", "", "", &c.name, c.passed.to_string());
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
