//! Balanced multiway ANOVA.
//!
//! Sums of squares come from inclusion-exclusion contrasts of marginal means,
//! which is exact only because every cell holds the same number of
//! observations. [`Dataset`] refuses anything else.

use serde::{Deserialize, Serialize};

use crate::design::{enumerate_effects, Design, EffectId};
use crate::error::{Error, Result};
use crate::special::{f_sf, FTestInput};
use crate::sum::{sum, NeumaierSum};

/// Responses grouped by cell, in the design's row-major cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    design: Design,
    cells: Vec<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from `(cell levels, response)` pairs in any order.
    pub fn new(
        design: Design,
        observations: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        let mut cells = vec![Vec::with_capacity(design.n_per_cell()); design.n_cells()];
        for (row, (levels, y)) in observations.into_iter().enumerate() {
            let index = design.cell_index(&levels).ok_or_else(|| {
                Error::InvalidDesign(format!(
                    "observation {row} has cell {levels:?} outside the design"
                ))
            })?;
            cells[index].push(y);
        }
        Self::from_cells(design, cells)
    }

    pub fn from_cells(design: Design, cells: Vec<Vec<f64>>) -> Result<Self> {
        if cells.len() != design.n_cells() {
            return Err(Error::InvalidDesign(format!(
                "expected {} cells, got {}",
                design.n_cells(),
                cells.len()
            )));
        }
        if let Some(i) = cells.iter().position(Vec::is_empty) {
            return Err(Error::MissingCell(format!(
                "cell {:?} has no observations",
                design.cell_levels(i)
            )));
        }
        let n = design.n_per_cell();
        let off: Vec<String> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() != n)
            .map(|(i, c)| format!("{:?}={}", design.cell_levels(i), c.len()))
            .collect();
        if !off.is_empty() {
            return Err(Error::Unbalanced(format!(
                "expected {n} observations per cell; got {}",
                off.join(", ")
            )));
        }
        if cells.iter().flatten().any(|y| !y.is_finite()) {
            return Err(Error::InvalidDesign("responses must be finite".into()));
        }
        Ok(Self { design, cells })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn cell(&self, levels: &[usize]) -> Option<&[f64]> {
        self.design
            .cell_index(levels)
            .map(|i| self.cells[i].as_slice())
    }

    pub fn responses(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMeans {
    design: Design,
    means: Vec<f64>,
}

impl CellMeans {
    pub fn get(&self, levels: &[usize]) -> Option<f64> {
        self.design.cell_index(levels).map(|i| self.means[i])
    }

    /// Means in row-major cell order.
    pub fn as_slice(&self) -> &[f64] {
        &self.means
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.means
    }
}

pub fn cell_means(dataset: &Dataset) -> CellMeans {
    let means = dataset
        .cells
        .iter()
        .map(|c| sum(c.iter().copied()) / c.len() as f64)
        .collect();
    CellMeans {
        design: dataset.design.clone(),
        means,
    }
}

/// Marginal mean tables for every subset of factors, indexed by bitmask.
///
/// Table `mask` is row-major over the member factors in ascending index
/// order; table 0 holds the single grand mean.
struct MarginalMeans {
    tables: Vec<Vec<f64>>,
}

impl MarginalMeans {
    fn new(design: &Design, means: &[f64]) -> Self {
        let k = design.n_factors();
        let levels: Vec<usize> = design.levels().collect();
        let n_cells = means.len();
        let cell_levels: Vec<Vec<usize>> = (0..n_cells).map(|i| design.cell_levels(i)).collect();
        let tables = (0u32..(1 << k))
            .map(|mask| {
                let size = table_size(&levels, mask);
                let per_bin = (n_cells / size) as f64;
                let mut acc = vec![NeumaierSum::new(); size];
                for (lv, &m) in cell_levels.iter().zip(means) {
                    acc[table_index(&levels, mask, lv)].add(m);
                }
                acc.iter().map(|s| s.total() / per_bin).collect()
            })
            .collect();
        Self { tables }
    }

    fn grand(&self) -> f64 {
        self.tables[0][0]
    }
}

fn table_size(levels: &[usize], mask: u32) -> usize {
    levels
        .iter()
        .enumerate()
        .filter(|(j, _)| mask & (1 << j) != 0)
        .map(|(_, &l)| l)
        .product()
}

fn table_index(levels: &[usize], mask: u32, cell: &[usize]) -> usize {
    let mut index = 0;
    for (j, (&l, &c)) in levels.iter().zip(cell).enumerate() {
        if mask & (1 << j) != 0 {
            index = index * l + c;
        }
    }
    index
}

/// Inclusion-exclusion contrasts of an effect, one per level combination
/// of its member factors (row-major over members).
///
/// For `U = {A, B}` this is `cell(a,b) - A(a) - B(b) + grand` on the
/// marginal means. `means` must be in the design's row-major cell order.
pub fn effect_contrasts(design: &Design, means: &[f64], effect: EffectId) -> Vec<f64> {
    assert_eq!(means.len(), design.n_cells(), "one mean per cell is required");
    let marginals = MarginalMeans::new(design, means);
    contrasts_from_marginals(design, &marginals, effect)
}

fn contrasts_from_marginals(
    design: &Design,
    marginals: &MarginalMeans,
    effect: EffectId,
) -> Vec<f64> {
    let levels: Vec<usize> = design.levels().collect();
    let u = effect.mask();
    let order = effect.order();
    let size = table_size(&levels, u);
    let members: Vec<usize> = effect.members().collect();

    // Every subset of U, with its inclusion-exclusion sign.
    let mut subsets = Vec::with_capacity(1 << order);
    let mut v = u;
    loop {
        let sign = if (order - v.count_ones() as usize).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        subsets.push((v, sign));
        if v == 0 {
            break;
        }
        v = (v - 1) & u;
    }

    let mut cell = vec![0usize; levels.len()];
    (0..size)
        .map(|combo| {
            let mut rest = combo;
            for &j in members.iter().rev() {
                cell[j] = rest % levels[j];
                rest /= levels[j];
            }
            let mut acc = NeumaierSum::new();
            for &(v, sign) in &subsets {
                acc.add(sign * marginals.tables[v as usize][table_index(&levels, v, &cell)]);
            }
            acc.total()
        })
        .collect()
}

fn ss_from_contrasts(design: &Design, effect: EffectId, contrasts: &[f64]) -> f64 {
    let replication: usize = design.n_per_cell()
        * design
            .levels()
            .enumerate()
            .filter(|(j, _)| !effect.contains(*j))
            .map(|(_, l)| l)
            .product::<usize>();
    replication as f64 * sum(contrasts.iter().map(|t| t * t))
}

/// Sum of squares of one effect.
pub fn effect_ss(dataset: &Dataset, effect: EffectId) -> Result<f64> {
    let design = dataset.design();
    if !design.contains(effect) {
        return Err(Error::InvalidFamily(format!(
            "effect {effect} is not part of a {}-factor design",
            design.n_factors()
        )));
    }
    let means = cell_means(dataset);
    let contrasts = effect_contrasts(design, means.as_slice(), effect);
    Ok(ss_from_contrasts(design, effect, &contrasts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub effect: EffectId,
    pub label: String,
    pub ss: f64,
    pub df: usize,
    pub ms: f64,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub n_factors: usize,
    pub rows: Vec<AnovaRow>,
    pub error_ss: f64,
    pub error_df: usize,
    pub mse: f64,
    pub total_ss: f64,
    pub total_df: usize,
}

impl AnovaTable {
    pub fn row(&self, effect: EffectId) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.effect == effect)
    }

    pub fn row_by_label(&self, label: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn is_full_family(&self) -> bool {
        let expected = (1usize << self.n_factors) - 1;
        if self.rows.len() != expected {
            return false;
        }
        let mut seen = vec![false; expected + 1];
        for r in &self.rows {
            let m = r.effect.mask() as usize;
            if m == 0 || m > expected || seen[m] {
                return false;
            }
            seen[m] = true;
        }
        true
    }
}

/// ANOVA table reporting the effects in `family`.
///
/// Error and total sums of squares do not depend on which effects are
/// reported.
pub fn anova_table(dataset: &Dataset, family: &[EffectId]) -> Result<AnovaTable> {
    let design = dataset.design();
    if family.is_empty() {
        return Err(Error::InvalidFamily("family is empty".into()));
    }
    for (i, e) in family.iter().enumerate() {
        if !design.contains(*e) {
            return Err(Error::InvalidFamily(format!(
                "effect {e} is not part of a {}-factor design",
                design.n_factors()
            )));
        }
        if family[..i].contains(e) {
            return Err(Error::InvalidFamily(format!(
                "effect `{}` listed twice",
                design.effect_label(*e)
            )));
        }
    }

    let means = cell_means(dataset);
    let marginals = MarginalMeans::new(design, means.as_slice());
    let grand = marginals.grand();

    let mut error_acc = NeumaierSum::new();
    let mut total_acc = NeumaierSum::new();
    let mut max_abs = 0.0f64;
    for (cell, &m) in dataset.cells().iter().zip(means.as_slice()) {
        for &y in cell {
            error_acc.add((y - m) * (y - m));
            total_acc.add((y - grand) * (y - grand));
            max_abs = max_abs.max(y.abs());
        }
    }
    let error_ss = error_acc.total();
    let total_ss = total_acc.total();
    let error_df = design.error_df();

    // Residuals this small are indistinguishable from rounding in the cell means.
    let n = design.n_total() as f64;
    let rounding_floor = n * (8.0 * f64::EPSILON * max_abs).powi(2);
    if error_ss <= rounding_floor {
        return Err(Error::DegenerateData(
            "zero within-cell variance; every F statistic is undefined".into(),
        ));
    }
    let mse = error_ss / error_df as f64;

    let rows = family
        .iter()
        .map(|&effect| {
            let contrasts = contrasts_from_marginals(design, &marginals, effect);
            let ss = ss_from_contrasts(design, effect, &contrasts);
            let df = design.effect_df(effect);
            let ms = ss / df as f64;
            let f = ms / mse;
            let p = f_sf(FTestInput::new(f, df, error_df)?)?;
            Ok(AnovaRow {
                effect,
                label: design.effect_label(effect),
                ss,
                df,
                ms,
                f,
                p,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(AnovaTable {
        n_factors: design.n_factors(),
        rows,
        error_ss,
        error_df,
        mse,
        total_ss,
        total_df: design.n_total() - 1,
    })
}

/// ANOVA table over every main effect and interaction.
pub fn full_anova_table(dataset: &Dataset) -> Result<AnovaTable> {
    anova_table(dataset, &enumerate_effects(dataset.design()))
}

/// Pooled F test of all main effects and interactions at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmnibusF {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
}

pub fn omnibus_f(table: &AnovaTable) -> Result<OmnibusF> {
    if !table.is_full_family() {
        return Err(Error::IncompleteFamily(format!(
            "the omnibus F test pools all {} effects, but the table reports {}",
            (1usize << table.n_factors) - 1,
            table.rows.len()
        )));
    }
    let ss = sum(table.rows.iter().map(|r| r.ss));
    let df1: usize = table.rows.iter().map(|r| r.df).sum();
    let f = (ss / df1 as f64) / table.mse;
    let p = f_sf(FTestInput::new(f, df1, table.error_df)?)?;
    Ok(OmnibusF {
        f,
        df1,
        df2: table.error_df,
        p,
    })
}
