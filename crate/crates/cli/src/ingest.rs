//! Long-format CSV ingestion: one row per observation, a numeric response
//! column and one categorical column per factor.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use famova_core::{Dataset, Design, Factor};

use crate::error::{CliError, CoreResultExt};

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Level names per factor, in order of first appearance.
    pub level_names: Vec<Vec<String>>,
}

pub fn ingest_csv(path: &Path, response: &str, factors: &[String]) -> Result<Ingested, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::io("input", format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, response, factors)
}

pub fn ingest_reader<R: Read>(
    reader: R,
    response: &str,
    factors: &[String],
) -> Result<Ingested, CliError> {
    if factors.is_empty() {
        return Err(CliError::validation("factors", "at least one factor column is required"));
    }
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| CliError::parse("input", format!("cannot read header: {e}")))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(CliError::parse("input", "file is empty; a header row is required"));
    }
    let column = |name: &str, field: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::validation(field, format!("no column named `{name}` in header")))
    };
    let response_col = column(response, "response")?;
    let factor_cols = factors
        .iter()
        .map(|f| column(f, "factors"))
        .collect::<Result<Vec<_>, _>>()?;
    if factor_cols.contains(&response_col) {
        return Err(CliError::validation("factors", "the response column cannot also be a factor"));
    }

    let mut level_names: Vec<Vec<String>> = vec![Vec::new(); factors.len()];
    let mut level_index: Vec<HashMap<String, usize>> = vec![HashMap::new(); factors.len()];
    let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();

    for record in csv.records() {
        let record = record.map_err(|e| CliError::parse("input", e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(response_col).unwrap_or("");
        let y: f64 = raw.parse().map_err(|_| {
            CliError::parse(
                "response",
                format!("line {line}: response `{raw}` is not a number"),
            )
        })?;
        if !y.is_finite() {
            return Err(CliError::parse(
                "response",
                format!("line {line}: response `{raw}` is not finite"),
            ));
        }
        let mut cell = Vec::with_capacity(factors.len());
        for (j, &col) in factor_cols.iter().enumerate() {
            let value = record.get(col).unwrap_or("");
            if value.is_empty() {
                return Err(CliError::parse(
                    "factors",
                    format!("line {line}: empty value for factor `{}`", factors[j]),
                ));
            }
            let next = level_names[j].len();
            let idx = *level_index[j].entry(value.to_string()).or_insert_with(|| {
                level_names[j].push(value.to_string());
                next
            });
            cell.push(idx);
        }
        rows.push((cell, y));
    }
    if rows.is_empty() {
        return Err(CliError::parse("input", "no data rows after the header"));
    }

    let shape: Vec<usize> = level_names.iter().map(Vec::len).collect();
    let cell_name = |cell: &[usize]| {
        cell.iter()
            .enumerate()
            .map(|(j, &l)| format!("{}={}", factors[j], level_names[j][l]))
            .collect::<Vec<_>>()
            .join(",")
    };
    let n_cells: usize = shape.iter().product();
    let mut counts = vec![0usize; n_cells];
    let linear = |cell: &[usize]| cell.iter().zip(&shape).fold(0, |acc, (&l, &s)| acc * s + l);
    for (cell, _) in &rows {
        counts[linear(cell)] += 1;
    }
    let decode = |mut i: usize| {
        let mut cell = vec![0; shape.len()];
        for (slot, &s) in cell.iter_mut().zip(&shape).rev() {
            *slot = i % s;
            i /= s;
        }
        cell
    };
    let missing: Vec<String> = (0..n_cells)
        .filter(|&i| counts[i] == 0)
        .map(|i| cell_name(&decode(i)))
        .collect();
    if !missing.is_empty() {
        return Err(CliError {
            error: "missing_cell".into(),
            ..CliError::validation(
                "input",
                format!("no observations for cell(s) {}", missing.join("; ")),
            )
        });
    }
    let n = counts[0];
    if counts.iter().any(|&c| c != n) {
        let listing: Vec<String> = (0..n_cells)
            .map(|i| format!("{}: {}", cell_name(&decode(i)), counts[i]))
            .collect();
        return Err(CliError {
            error: "unbalanced_design".into(),
            ..CliError::validation(
                "input",
                format!("cell counts differ ({})", listing.join("; ")),
            )
        });
    }

    let design = Design::new(
        factors
            .iter()
            .zip(&shape)
            .map(|(name, &levels)| Factor::new(name.clone(), levels))
            .collect(),
        n,
    )
    .field("input")?;
    let dataset = Dataset::new(design, rows).field("input")?;
    Ok(Ingested {
        dataset,
        level_names,
    })
}
