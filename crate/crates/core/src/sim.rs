//! Monte Carlo estimates of familywise error rate, false discovery rate and
//! power for each correction method.
//!
//! Replicate `i` draws from its own ChaCha8 stream: the key is expanded
//! from the master seed with SplitMix64 and the stream id is `i`. Replicates
//! are therefore independent of scheduling, and aggregation uses exact
//! integer counts, so a result is bitwise identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anova::{anova_table, effect_contrasts, Dataset};
use crate::corrections::{decide_table, Method};
use crate::design::{enumerate_effects, Design, EffectId};
use crate::error::{Error, Result};

/// Population contrasts at or below this magnitude count as zero.
pub const EFFECT_TRUTH_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_REPLICATIONS: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub design: Design,
    /// True mean of every cell, in the design's row-major cell order.
    pub cell_means: Vec<f64>,
    pub sigma: f64,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub replications: u64,
    pub seed: u64,
}

impl SimConfig {
    /// All cell means equal: every hypothesis in the family is true.
    pub fn global_null(design: Design, alpha: f64, methods: Vec<Method>, replications: u64, seed: u64) -> Self {
        let cells = design.n_cells();
        Self {
            design,
            cell_means: vec![0.0; cells],
            sigma: 1.0,
            alpha,
            methods,
            replications,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSimConfig(msg));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and > 0, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} is outside (0, 1)", self.alpha));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.cell_means.len() != self.design.n_cells() {
            return bad(format!(
                "cell_means has {} entries but the design has {} cells",
                self.cell_means.len(),
                self.design.n_cells()
            ));
        }
        if self.cell_means.iter().any(|m| !m.is_finite()) {
            return bad("cell means must be finite".into());
        }
        Ok(())
    }

    fn unique_methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for &m in &self.methods {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }
}

/// Split of the full family into true and false null hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueEffects {
    pub null: Vec<EffectId>,
    pub non_null: Vec<EffectId>,
}

impl TrueEffects {
    pub fn is_null(&self, effect: EffectId) -> bool {
        self.null.contains(&effect)
    }
}

/// An effect is truly null when every one of its population contrasts vanishes.
pub fn classify_true_effects(config: &SimConfig) -> Result<TrueEffects> {
    config.validate()?;
    let mut out = TrueEffects {
        null: Vec::new(),
        non_null: Vec::new(),
    };
    for effect in enumerate_effects(&config.design) {
        let contrasts = effect_contrasts(&config.design, &config.cell_means, effect);
        if contrasts.iter().all(|c| c.abs() <= EFFECT_TRUTH_TOLERANCE) {
            out.null.push(effect);
        } else {
            out.non_null.push(effect);
        }
    }
    Ok(out)
}

/// Reject/retain for every effect under every method, for one replicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicateOutcome {
    /// The full family, in enumeration order.
    pub effects: Vec<EffectId>,
    /// Per method, `true` where the effect at the same position was rejected.
    pub rejections: Vec<(Method, Vec<bool>)>,
    /// Whether the first draw had zero within-cell variance and was replaced.
    pub redrawn: bool,
}

impl ReplicateOutcome {
    pub fn rejected(&self, method: Method) -> Option<&[bool]> {
        self.rejections
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, r)| r.as_slice())
    }
}

struct Prepared<'a> {
    config: &'a SimConfig,
    methods: Vec<Method>,
    effects: Vec<EffectId>,
    null_mask: Vec<bool>,
    key: [u8; 32],
}

impl<'a> Prepared<'a> {
    fn new(config: &'a SimConfig) -> Result<Self> {
        let truth = classify_true_effects(config)?;
        let effects = enumerate_effects(&config.design);
        let null_mask = effects.iter().map(|e| truth.is_null(*e)).collect();
        Ok(Self {
            config,
            methods: config.unique_methods(),
            effects,
            null_mask,
            key: expand_seed(config.seed),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Dataset> {
        let n = self.config.design.n_per_cell();
        let sigma = self.config.sigma;
        let cells = self
            .config
            .cell_means
            .iter()
            .map(|&mu| {
                (0..n)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        mu + sigma * z
                    })
                    .collect()
            })
            .collect();
        Dataset::from_cells(self.config.design.clone(), cells)
    }

    fn run(&self, index: u64) -> Result<ReplicateOutcome> {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);

        let mut redrawn = false;
        let table = loop {
            let data = self.draw(&mut rng)?;
            match anova_table(&data, &self.effects) {
                Ok(t) => break t,
                Err(Error::DegenerateData(_)) if !redrawn => redrawn = true,
                Err(e) => return Err(e),
            }
        };

        let rejections = self
            .methods
            .iter()
            .map(|&m| {
                let decisions = decide_table(m, &table, self.config.alpha)?;
                Ok((m, decisions.rows.iter().map(|r| r.decision.is_rejected()).collect()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReplicateOutcome {
            effects: self.effects.clone(),
            rejections,
            redrawn,
        })
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Runs a single replicate. Deterministic in `(config, index)`.
pub fn run_replicate(config: &SimConfig, index: u64) -> Result<ReplicateOutcome> {
    Prepared::new(config)?.run(index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRate {
    pub effect: EffectId,
    pub label: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Proportion of replicates with at least one false rejection.
    pub fwer_hat: f64,
    pub fwer_se: f64,
    /// Mean of V / max(R, 1).
    pub fdr_hat: f64,
    pub false_rejection_replicates: u64,
    /// Rejection rate of each truly non-null effect.
    pub power: Vec<EffectRate>,
    /// Rejection rate of every effect in the family.
    pub rejection_rates: Vec<EffectRate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub design: Design,
    pub cell_means: Vec<f64>,
    pub sigma: f64,
    pub alpha: f64,
    pub replications: u64,
    pub seed: u64,
    pub null_effects: Vec<String>,
    pub non_null_effects: Vec<String>,
    /// Replicates whose first draw was degenerate and had to be redrawn.
    pub redraws: u64,
    pub methods: Vec<MethodSummary>,
}

impl SimResult {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == method)
    }
}

#[derive(Clone)]
struct Tally {
    m: usize,
    any_false: Vec<u64>,
    /// Per method, counts of replicates indexed by `v * (m + 1) + r`.
    fdp: Vec<Vec<u64>>,
    rejections: Vec<Vec<u64>>,
    redraws: u64,
}

impl Tally {
    fn new(n_methods: usize, m: usize) -> Self {
        Self {
            m,
            any_false: vec![0; n_methods],
            fdp: vec![vec![0; (m + 1) * (m + 1)]; n_methods],
            rejections: vec![vec![0; m]; n_methods],
            redraws: 0,
        }
    }

    fn record(&mut self, outcome: &ReplicateOutcome, null_mask: &[bool]) {
        for (k, (_, rejected)) in outcome.rejections.iter().enumerate() {
            let mut v = 0;
            let mut r = 0;
            for (j, &rej) in rejected.iter().enumerate() {
                if rej {
                    r += 1;
                    self.rejections[k][j] += 1;
                    if null_mask[j] {
                        v += 1;
                    }
                }
            }
            if v > 0 {
                self.any_false[k] += 1;
            }
            self.fdp[k][v * (self.m + 1) + r] += 1;
        }
        self.redraws += u64::from(outcome.redrawn);
    }

    fn merge(mut self, other: Tally) -> Tally {
        let add = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.any_false, &other.any_false);
        for (a, b) in self.fdp.iter_mut().zip(&other.fdp) {
            add(a, b);
        }
        for (a, b) in self.rejections.iter_mut().zip(&other.rejections) {
            add(a, b);
        }
        self.redraws += other.redraws;
        self
    }
}

/// Runs all replicates on the current rayon pool.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    let prepared = Prepared::new(config)?;
    let n_methods = prepared.methods.len();
    let m = prepared.effects.len();
    let tally = (0..config.replications)
        .into_par_iter()
        .map(|i| prepared.run(i))
        .try_fold(
            || Tally::new(n_methods, m),
            |mut t, outcome| {
                t.record(&outcome?, &prepared.null_mask);
                Ok::<_, Error>(t)
            },
        )
        .try_reduce(|| Tally::new(n_methods, m), |a, b| Ok(a.merge(b)))?;
    Ok(summarize(&prepared, tally))
}

/// Runs all replicates on a dedicated pool of `workers` threads.
pub fn simulate_with_workers(config: &SimConfig, workers: usize) -> Result<SimResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidSimConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| simulate(config))
}

fn summarize(prepared: &Prepared<'_>, tally: Tally) -> SimResult {
    let config = prepared.config;
    let design = &config.design;
    let reps = config.replications as f64;
    let m = tally.m;

    let methods = prepared
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let fwer_hat = tally.any_false[k] as f64 / reps;
            // Fixed summation order keeps the estimate independent of scheduling.
            let mut fdp_total = 0.0;
            for r in 1..=m {
                for v in 0..=r {
                    let count = tally.fdp[k][v * (m + 1) + r];
                    if count > 0 {
                        fdp_total += count as f64 * (v as f64 / r as f64);
                    }
                }
            }
            let rates: Vec<EffectRate> = prepared
                .effects
                .iter()
                .enumerate()
                .map(|(j, &effect)| EffectRate {
                    effect,
                    label: design.effect_label(effect),
                    rate: tally.rejections[k][j] as f64 / reps,
                })
                .collect();
            MethodSummary {
                method,
                fwer_hat,
                fwer_se: (fwer_hat * (1.0 - fwer_hat) / reps).sqrt(),
                fdr_hat: fdp_total / reps,
                false_rejection_replicates: tally.any_false[k],
                power: rates
                    .iter()
                    .zip(&prepared.null_mask)
                    .filter(|(_, null)| !**null)
                    .map(|(r, _)| r.clone())
                    .collect(),
                rejection_rates: rates,
            }
        })
        .collect();

    let label = |keep_null: bool| {
        prepared
            .effects
            .iter()
            .zip(&prepared.null_mask)
            .filter(|(_, &null)| null == keep_null)
            .map(|(e, _)| design.effect_label(*e))
            .collect()
    };

    SimResult {
        design: design.clone(),
        cell_means: config.cell_means.clone(),
        sigma: config.sigma,
        alpha: config.alpha,
        replications: config.replications,
        seed: config.seed,
        null_effects: label(true),
        non_null_effects: label(false),
        redraws: tally.redraws,
        methods,
    }
}
