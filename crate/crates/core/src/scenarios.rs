//! Named simulation scenarios reproducing the error-rate claims for
//! exploratory two- and three-way designs.

use crate::corrections::Method;
use crate::design::Design;
use crate::error::Result;
use crate::sim::SimConfig;

pub const DEFAULT_SEED: u64 = 20_150_401;

/// Lower edge of the accepted FWER band for the uncorrected 2x3 global null
/// with 30 error df: below the independence value, but not by much.
pub const DEPENDENT_FWER_LOWER: f64 = 0.125;
/// Upper edge of the same band, just above 1 - 0.95^3.
pub const DEPENDENT_FWER_UPPER: f64 = 0.1427;

/// Tolerance around 1 - 0.95^3 once the error df is large.
pub const ASYMPTOTIC_FWER_TOLERANCE: f64 = 0.006;

/// 2x3 design (factors G and E) with every null true.
///
/// With `n_per_cell = 6` the error df is 30, as in the worked example.
pub fn two_by_three_global_null(
    n_per_cell: usize,
    methods: Vec<Method>,
    replications: u64,
    seed: u64,
) -> Result<SimConfig> {
    let design = Design::from_levels([("G", 2), ("E", 3)], n_per_cell)?;
    Ok(SimConfig::global_null(design, 0.05, methods, replications, seed))
}

/// 2x2x2 design in which only factor A has an effect, of `delta` noise
/// standard deviations between its two levels. The other six effects are null.
pub fn three_way_partial_null(
    delta: f64,
    n_per_cell: usize,
    methods: Vec<Method>,
    replications: u64,
    seed: u64,
) -> Result<SimConfig> {
    let design = Design::from_levels([("A", 2), ("B", 2), ("C", 2)], n_per_cell)?;
    let cell_means = (0..design.n_cells())
        .map(|i| if design.cell_levels(i)[0] == 1 { delta } else { 0.0 })
        .collect();
    Ok(SimConfig {
        design,
        cell_means,
        sigma: 1.0,
        alpha: 0.05,
        methods,
        replications,
        seed,
    })
}
