//! Factorial designs, their effects, and the family of tested hypotheses.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Upper bound on the number of crossed factors. The family grows as 2^k - 1.
pub const MAX_FACTORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub levels: usize,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: usize) -> Self {
        Self {
            name: name.into(),
            levels,
        }
    }
}

/// A fully crossed, balanced between-subjects design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDesign")]
pub struct Design {
    factors: Vec<Factor>,
    n_per_cell: usize,
}

#[derive(Deserialize)]
struct RawDesign {
    factors: Vec<Factor>,
    n_per_cell: usize,
}

impl TryFrom<RawDesign> for Design {
    type Error = Error;

    fn try_from(raw: RawDesign) -> Result<Self> {
        Design::new(raw.factors, raw.n_per_cell)
    }
}

impl Design {
    pub fn new(factors: Vec<Factor>, n_per_cell: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDesign("at least one factor is required".into()));
        }
        if factors.len() > MAX_FACTORS {
            return Err(Error::InvalidDesign(format!(
                "{} factors exceeds the supported maximum of {MAX_FACTORS}",
                factors.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for f in &factors {
            if f.name.trim().is_empty() {
                return Err(Error::InvalidDesign("factor names must be nonempty".into()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidDesign(format!(
                    "duplicate factor name `{}`",
                    f.name
                )));
            }
            if f.levels < 2 {
                return Err(Error::InvalidDesign(format!(
                    "factor `{}` has {} level(s); at least 2 are required",
                    f.name, f.levels
                )));
            }
        }
        if n_per_cell < 2 {
            return Err(Error::InvalidDesign(format!(
                "n_per_cell = {n_per_cell}; at least 2 observations per cell are needed for a positive error df"
            )));
        }
        let cells = factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.levels))
            .and_then(|c| c.checked_mul(n_per_cell).map(|_| c))
            .ok_or_else(|| Error::InvalidDesign("design is too large".into()))?;
        debug_assert!(cells >= 2);
        Ok(Self {
            factors,
            n_per_cell,
        })
    }

    /// Convenience constructor from `(name, levels)` pairs.
    pub fn from_levels<S: Into<String>>(
        factors: impl IntoIterator<Item = (S, usize)>,
        n_per_cell: usize,
    ) -> Result<Self> {
        Self::new(
            factors
                .into_iter()
                .map(|(n, l)| Factor::new(n, l))
                .collect(),
            n_per_cell,
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn n_per_cell(&self) -> usize {
        self.n_per_cell
    }

    pub fn levels(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|f| f.levels)
    }

    pub fn n_cells(&self) -> usize {
        self.levels().product()
    }

    pub fn n_total(&self) -> usize {
        self.n_cells() * self.n_per_cell
    }

    pub fn error_df(&self) -> usize {
        self.n_total() - self.n_cells()
    }

    /// Numerator degrees of freedom of an effect: the product of (L_j - 1) over its members.
    pub fn effect_df(&self, effect: EffectId) -> usize {
        effect.members().map(|j| self.factors[j].levels - 1).product()
    }

    /// Row-major linear index of a cell; the last factor varies fastest.
    pub fn cell_index(&self, levels: &[usize]) -> Option<usize> {
        if levels.len() != self.factors.len() {
            return None;
        }
        let mut index = 0;
        for (&l, f) in levels.iter().zip(&self.factors) {
            if l >= f.levels {
                return None;
            }
            index = index * f.levels + l;
        }
        Some(index)
    }

    pub fn cell_levels(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.levels;
            index /= f.levels;
        }
        out
    }

    pub fn contains(&self, effect: EffectId) -> bool {
        effect.0 != 0 && effect.0 >> self.factors.len() == 0
    }

    /// User-facing label: factor names joined by `x`, e.g. `GxE`.
    pub fn effect_label(&self, effect: EffectId) -> String {
        effect
            .members()
            .map(|j| self.factors[j].name.as_str())
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Parses a label such as `GxE` (or `G x E`, `G×E`) into an effect.
    ///
    /// Factor names may themselves contain `x`; the label is split by trying
    /// every segmentation into known names, and a label that admits two
    /// different readings is rejected as ambiguous.
    pub fn parse_effect(&self, label: &str) -> Result<EffectId> {
        let compact: String = label.replace('×', "x");
        let trimmed = compact.trim();
        if trimmed.is_empty() {
            return Err(Error::InvalidFamily("empty effect label".into()));
        }
        let mut readings = BTreeSet::new();
        self.segment(trimmed, 0, Vec::new(), &mut readings);
        if readings.is_empty() {
            // Tolerate spaces around the separator.
            let spaced: String = trimmed.split(" x ").map(str::trim).collect::<Vec<_>>().join("x");
            if spaced != trimmed {
                self.segment(&spaced, 0, Vec::new(), &mut readings);
            }
        }
        let mut distinct: BTreeSet<EffectId> = BTreeSet::new();
        let mut repeated = false;
        for reading in &readings {
            let set: BTreeSet<usize> = reading.iter().copied().collect();
            if set.len() != reading.len() {
                repeated = true;
                continue;
            }
            distinct.insert(EffectId::from_members(set).expect("nonempty by construction"));
        }
        match distinct.len() {
            1 => Ok(distinct.into_iter().next().unwrap()),
            0 if repeated => Err(Error::InvalidFamily(format!(
                "effect `{label}` names the same factor twice"
            ))),
            0 => Err(Error::InvalidFamily(format!(
                "effect `{label}` does not match any combination of factors {:?}",
                self.factors.iter().map(|f| &f.name).collect::<Vec<_>>()
            ))),
            _ => Err(Error::InvalidFamily(format!("effect `{label}` is ambiguous"))),
        }
    }

    fn segment(&self, s: &str, pos: usize, acc: Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        let rest = &s[pos..];
        for (j, f) in self.factors.iter().enumerate() {
            if let Some(after) = rest.strip_prefix(f.name.as_str()) {
                let mut next = acc.clone();
                next.push(j);
                if after.is_empty() {
                    out.insert(next);
                } else if after.starts_with('x') && after.len() > 1 {
                    let consumed = s.len() - after.len() + 1;
                    self.segment(s, consumed, next, out);
                }
            }
        }
    }
}

/// A main effect or interaction, identified by its set of factor indices.
///
/// Stored as a bitmask over factor indices; bit `j` set means factor `j` is a member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EffectId(u32);

impl EffectId {
    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = 0u32;
        for j in members {
            if j >= MAX_FACTORS {
                return Err(Error::InvalidFamily(format!("factor index {j} is out of range")));
            }
            mask |= 1 << j;
        }
        if mask == 0 {
            return Err(Error::InvalidFamily("an effect needs at least one factor".into()));
        }
        Ok(Self(mask))
    }

    pub fn main(factor: usize) -> Self {
        assert!(factor < MAX_FACTORS);
        Self(1 << factor)
    }

    pub(crate) fn from_mask(mask: u32) -> Self {
        debug_assert!(mask != 0);
        Self(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..MAX_FACTORS).filter(move |j| mask & (1 << j) != 0)
    }

    /// 1 for a main effect, 2 for a two-way interaction, and so on.
    pub fn order(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, factor: usize) -> bool {
        factor < MAX_FACTORS && self.0 & (1 << factor) != 0
    }
}

impl Ord for EffectId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.members().cmp(other.members()))
    }
}

impl PartialOrd for EffectId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EffectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().map(|j| j.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for EffectId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.members())
    }
}

impl<'de> Deserialize<'de> for EffectId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        EffectId::from_members(members).map_err(serde::de::Error::custom)
    }
}

/// Which hypotheses are tested.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "declared", rename_all = "lowercase")]
pub enum FamilySpec {
    /// Every main effect and interaction.
    #[default]
    Exploratory,
    /// Only the effects declared before seeing the data.
    Preregistered(BTreeSet<EffectId>),
}

impl FamilySpec {
    pub fn preregistered(effects: impl IntoIterator<Item = EffectId>) -> Self {
        FamilySpec::Preregistered(effects.into_iter().collect())
    }

    /// Builds a preregistered family from labels like `G` and `GxE`.
    pub fn from_labels<S: AsRef<str>>(design: &Design, labels: &[S]) -> Result<Self> {
        let effects = labels
            .iter()
            .map(|l| design.parse_effect(l.as_ref()))
            .collect::<Result<BTreeSet<_>>>()?;
        if effects.is_empty() {
            return Err(Error::InvalidFamily("preregistered family is empty".into()));
        }
        Ok(FamilySpec::Preregistered(effects))
    }
}

/// All 2^k - 1 effects, main effects first, then by ascending member indices.
pub fn enumerate_effects(design: &Design) -> Vec<EffectId> {
    let k = design.n_factors();
    let mut effects: Vec<EffectId> = (1u32..(1u32 << k)).map(EffectId::from_mask).collect();
    effects.sort();
    effects
}

pub fn resolve_family(design: &Design, spec: &FamilySpec) -> Result<Vec<EffectId>> {
    match spec {
        FamilySpec::Exploratory => Ok(enumerate_effects(design)),
        FamilySpec::Preregistered(declared) => {
            if declared.is_empty() {
                return Err(Error::InvalidFamily("preregistered family is empty".into()));
            }
            if let Some(bad) = declared.iter().find(|e| !design.contains(**e)) {
                return Err(Error::InvalidFamily(format!(
                    "effect {bad} references a factor outside 0..{}",
                    design.n_factors()
                )));
            }
            // BTreeSet iteration already follows enumeration order.
            Ok(declared.iter().copied().collect())
        }
    }
}

/// Probability of at least one rejection among `m` independent level-`alpha`
/// tests when every null is true: 1 - (1 - alpha)^m.
pub fn independence_bound(m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(domain("m", "number of tests must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", format!("{alpha} is outside (0, 1)")));
    }
    // alpha * (1 + q + ... + q^(m-1)) with q = 1 - alpha: exact at m = 1 and
    // free of the cancellation in 1 - q^m for small alpha.
    if m <= 1024 {
        let q = 1.0 - alpha;
        let mut term = 1.0;
        let mut series = 0.0;
        for _ in 0..m {
            series += term;
            term *= q;
        }
        Ok(alpha * series)
    } else {
        Ok(-(m as f64 * (-alpha).ln_1p()).exp_m1())
    }
}
