//! Log-gamma, the regularized incomplete beta function, and the F survival function.

// Coefficients and reference values are kept exactly as published; the
// negated comparisons deliberately send NaN down the rejection path.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

// Lanczos approximation with g = 7 and nine coefficients (the set used by
// GSL and Numerical Recipes 3rd ed. derivatives). Relative accuracy on Gamma
// is about 1e-15 for x >= 0.5.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_741_78;

const CF_TOLERANCE: f64 = 1e-15;
const CF_MAX_ITERATIONS: usize = 300;
const CF_TINY: f64 = 1e-300;

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("x", format!("log_gamma requires a finite x > 0, got {x}")));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s).ln() - ln_gamma_positive(1.0 - x);
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + series.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_positive(a) + ln_gamma_positive(b) - ln_gamma_positive(a + b)
}

/// Regularized incomplete beta function I_x(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", format!("{x} is outside [0, 1]")));
    }
    check_shape("a", a)?;
    check_shape("b", b)?;
    reg_inc_beta_split(x, 1.0 - x, a, b)
}

fn check_shape(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(field, format!("shape parameter must be finite and > 0, got {v}")))
    }
}

/// `x` and `y = 1 - x` are passed separately so callers that know the
/// complement exactly do not lose it to cancellation.
fn reg_inc_beta_split(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(beta_front(x, y, a, b) * beta_continued_fraction(x, a, b)? / a)
    } else {
        Ok(1.0 - beta_front(y, x, b, a) * beta_continued_fraction(y, b, a)? / b)
    }
}

fn beta_front(x: f64, y: f64, a: f64, b: f64) -> f64 {
    (a * x.ln() + b * y.ln() - ln_beta(a, b)).exp()
}

/// Continued fraction for I_x(a, b), evaluated with the modified Lentz method.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;

    for m in 1..=CF_MAX_ITERATIONS {
        let m = m as f64;
        let m2 = 2.0 * m;

        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;

        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() <= CF_TOLERANCE {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence { x, a, b })
}

/// An F statistic with its numerator and denominator degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTestInput {
    f: f64,
    df1: usize,
    df2: usize,
}

impl FTestInput {
    pub fn new(f: f64, df1: usize, df2: usize) -> Result<Self> {
        if !(f >= 0.0) {
            return Err(domain("f", format!("F statistic must be >= 0, got {f}")));
        }
        if df1 == 0 {
            return Err(domain("df1", "numerator degrees of freedom must be >= 1"));
        }
        if df2 == 0 {
            return Err(domain("df2", "denominator degrees of freedom must be >= 1"));
        }
        Ok(Self { f, df1, df2 })
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn df1(&self) -> usize {
        self.df1
    }

    pub fn df2(&self) -> usize {
        self.df2
    }
}

/// Upper-tail probability P(F_{df1,df2} > f).
pub fn f_sf(input: FTestInput) -> Result<f64> {
    let FTestInput { f, df1, df2 } = input;
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let d1 = df1 as f64;
    let d2 = df2 as f64;
    let denom = d2 + d1 * f;
    let p = reg_inc_beta_split(d2 / denom, d1 * f / denom, d2 / 2.0, d1 / 2.0)?;
    Ok(p.clamp(0.0, 1.0))
}
