//! Reference computations that share no code path with the library.
#![allow(dead_code, clippy::excessive_precision)]

use famova_core::{enumerate_effects, Dataset, Design, EffectId};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random balanced dataset: 1 to 3 factors, 2 to 4 levels each, 2 to 5
/// observations per cell, responses around a random offset.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let k = rng.random_range(1..=3);
    let names = ["A", "B", "C"];
    let factors: Vec<(&str, usize)> = (0..k).map(|j| (names[j], rng.random_range(2..=4))).collect();
    let n = rng.random_range(2..=5);
    let design = Design::from_levels(factors, n).unwrap();
    let offset = rng.random_range(-10.0..10.0);
    let effect_scale: f64 = rng.random_range(0.0..2.0);
    let cell_shift: Vec<f64> = (0..design.n_cells())
        .map(|_| effect_scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let cells = cell_shift
        .iter()
        .map(|s| {
            (0..n)
                .map(|_| offset + s + rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Dataset::from_cells(design, cells).unwrap()
}

/// Sum-to-zero coding: column `l` is +1 at level `l` and -1 at the last level.
fn effect_coding(levels: usize) -> DMatrix<f64> {
    DMatrix::from_fn(levels, levels - 1, |row, col| {
        if row == col {
            1.0
        } else if row == levels - 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Model-matrix columns of one effect for a single observation in `cell`.
fn effect_columns(design: &Design, effect: EffectId, cell: &[usize]) -> Vec<f64> {
    let mut cols = vec![1.0];
    for (j, f) in design.factors().iter().enumerate() {
        if !effect.contains(j) {
            continue;
        }
        let coding = effect_coding(f.levels);
        let row: Vec<f64> = coding.row(cell[j]).iter().copied().collect();
        cols = cols
            .iter()
            .flat_map(|a| row.iter().map(move |b| a * b))
            .collect();
    }
    cols
}

fn fitted(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let q = x.clone().qr().q();
    &q * (q.transpose() * y)
}

/// Sequential least-squares sums of squares.
///
/// Starting from the intercept-only model, effects are added in enumeration
/// order; each effect's SS is the squared norm of the change in fitted
/// values. After the last effect the model is the full cell-means model, and
/// its residual sum of squares is the error SS.
pub struct ProjectionSs {
    pub effects: Vec<(EffectId, f64)>,
    pub error_ss: f64,
    pub total_ss: f64,
}

pub fn projection_ss(dataset: &Dataset) -> ProjectionSs {
    let design = dataset.design();
    let rows: Vec<(Vec<usize>, f64)> = dataset
        .cells()
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            let lv = design.cell_levels(i);
            c.iter().map(move |&y| (lv.clone(), y))
        })
        .collect();
    let n = rows.len();
    let y = DVector::from_iterator(n, rows.iter().map(|(_, y)| *y));

    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let build = |columns: &Vec<Vec<f64>>| DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
    let mut prev_fit = fitted(&build(&columns), &y);
    let total_ss = (&y - &prev_fit).norm_squared();

    let mut effects = Vec::new();
    for effect in enumerate_effects(design) {
        let per_row: Vec<Vec<f64>> = rows
            .iter()
            .map(|(cell, _)| effect_columns(design, effect, cell))
            .collect();
        for c in 0..per_row[0].len() {
            columns.push(per_row.iter().map(|r| r[c]).collect());
        }
        let fit = fitted(&build(&columns), &y);
        effects.push((effect, (&fit - &prev_fit).norm_squared()));
        prev_fit = fit;
    }
    let error_ss = (&y - &prev_fit).norm_squared();
    ProjectionSs {
        effects,
        error_ss,
        total_ss,
    }
}

/// Oneway F statistic treating every cell as its own group.
pub fn oneway_f_over_cells(dataset: &Dataset) -> f64 {
    let groups = dataset.cells();
    let g = groups.len() as f64;
    let n: f64 = groups.iter().map(|c| c.len() as f64).sum();
    let grand: f64 = groups.iter().flatten().sum::<f64>() / n;
    let mut between = 0.0;
    let mut within = 0.0;
    for c in groups {
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        between += c.len() as f64 * (mean - grand).powi(2);
        within += c.iter().map(|y| (y - mean).powi(2)).sum::<f64>();
    }
    (between / (g - 1.0)) / (within / (n - g))
}

/// ln Gamma(d / 2) for a positive integer `d`, by exact recurrence from
/// Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
fn ln_gamma_half_integer(d: usize) -> f64 {
    if d.is_multiple_of(2) {
        (1..d / 2).map(|k| (k as f64).ln()).sum()
    } else {
        0.5 * std::f64::consts::PI.ln() + (0..(d - 1) / 2).map(|k| (k as f64 + 0.5).ln()).sum::<f64>()
    }
}

fn ln_beta_half(d1: usize, d2: usize) -> f64 {
    ln_gamma_half_integer(d1) + ln_gamma_half_integer(d2) - ln_gamma_half_integer(d1 + d2)
}

/// F(d1, d2) CDF at `f` by adaptive Gauss-Kronrod quadrature of the density.
///
/// Substituting x = t^2 removes the x^(d1/2 - 1) singularity at the origin.
pub fn f_cdf_by_quadrature(f: f64, d1: usize, d2: usize) -> f64 {
    let a = d1 as f64 / 2.0;
    let b = d2 as f64 / 2.0;
    let log_norm = a * (d1 as f64 / d2 as f64).ln() - ln_beta_half(d1, d2);
    let integrand = |t: f64| {
        if t == 0.0 {
            return if d1 == 1 { 2.0 * log_norm.exp() } else { 0.0 };
        }
        let x = t * t;
        let log_pdf_t = log_norm
            + std::f64::consts::LN_2
            + (d1 as f64 - 1.0) * t.ln()
            - (a + b) * (1.0 + d1 as f64 * x / d2 as f64).ln();
        log_pdf_t.exp()
    };
    adaptive_gauss_kronrod(&integrand, 0.0, f.sqrt(), 1e-13, 60)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

pub fn adaptive_gauss_kronrod(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (value, err) = gk15(f, lo, hi);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (lo + hi);
    adaptive_gauss_kronrod(f, lo, mid, tol / 2.0, depth - 1)
        + adaptive_gauss_kronrod(f, mid, hi, tol / 2.0, depth - 1)
}

/// Relative difference with a floor so near-zero references compare absolutely
/// against `scale`.
pub fn rel_diff(got: f64, expected: f64, scale: f64) -> f64 {
    (got - expected).abs() / expected.abs().max(scale)
}

/// A 2x3 dataset (factors G and E, 6 per cell, error df 30) whose F
/// statistics are exactly 5 (G), 4 (E) and 4.5 (GxE) with MSE = 1.
///
/// Effects: G = +/-sqrt(5/36) gives SS_G = 18 * 2 * 5/36 = 5; E = (1, -1, 0)/sqrt(3)
/// gives SS_E = 12 * 2/3 = 8; GxE = sqrt(3/8) * [[1, -1, 0], [-1, 1, 0]] gives
/// SS_GxE = 6 * 4 * 3/8 = 9. Within-cell deviations of +/-sqrt(30/36) give SSE = 30.
pub fn table_one_dataset() -> Dataset {
    let design = Design::from_levels([("G", 2), ("E", 3)], 6).unwrap();
    let g = [(5.0f64 / 36.0).sqrt(), -(5.0f64 / 36.0).sqrt()];
    let e = [1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt(), 0.0];
    let ge_scale = (3.0f64 / 8.0).sqrt();
    let ge = [[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0]];
    let s = (30.0f64 / 36.0).sqrt();
    let mut cells = Vec::new();
    for i in 0..2 {
        for j in 0..3 {
            let mu = 10.0 + g[i] + e[j] + ge_scale * ge[i][j];
            cells.push((0..6).map(|r| if r % 2 == 0 { mu + s } else { mu - s }).collect());
        }
    }
    Dataset::from_cells(design, cells).unwrap()
}
