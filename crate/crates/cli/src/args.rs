//! Command-line and config-file argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "famova", version, about = "Multiway ANOVA with family-wise error control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a balanced factorial ANOVA to a CSV file and apply corrections.
    Anova(AnovaArgs),
    /// Apply corrections to a vector of p-values.
    Adjust(AdjustArgs),
    /// Estimate error rates of the corrections by Monte Carlo simulation.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct AnovaArgs {
    /// Long-format CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the numeric response column.
    #[arg(long)]
    pub response: String,
    /// Factor column names (comma-separated or repeated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub factors: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Correction method: none, bonferroni, holm, bh or omnibus (repeatable).
    #[arg(long = "method", value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Preregistered family as effect labels, e.g. "G,GxE". Defaults to every
    /// main effect and interaction.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AdjustArgs {
    /// P-values to adjust.
    #[arg(allow_negative_numbers = true)]
    pub values: Vec<String>,
    /// File with one p-value per line, either `p` or `label,p`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Correction method: none, bonferroni, holm or bh (repeatable).
    #[arg(long = "method", value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file whose keys mirror the flags below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimFlags,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Simulation settings shared by the command line and the config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimFlags {
    /// Named scenario; see `famova simulate --preset list`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Factor names (default A, B, C, ...).
    #[arg(long, value_delimiter = ',')]
    pub factors: Option<Vec<String>>,
    /// Number of levels per factor, e.g. "2,3".
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    #[arg(long)]
    pub n_per_cell: Option<usize>,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// True cell means in row-major order (last factor fastest); default all zero.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub means: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Correction method (repeatable); default all five.
    #[arg(long = "method", value_delimiter = ',')]
    #[serde(default, alias = "methods")]
    pub method: Vec<String>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; the result does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl SimFlags {
    /// Field-wise merge in which `self` wins over `fallback`.
    pub fn or(self, fallback: SimFlags) -> SimFlags {
        SimFlags {
            preset: self.preset.or(fallback.preset),
            factors: self.factors.or(fallback.factors),
            levels: self.levels.or(fallback.levels),
            n_per_cell: self.n_per_cell.or(fallback.n_per_cell),
            sigma: self.sigma.or(fallback.sigma),
            means: self.means.or(fallback.means),
            alpha: self.alpha.or(fallback.alpha),
            method: if self.method.is_empty() {
                fallback.method
            } else {
                self.method
            },
            reps: self.reps.or(fallback.reps),
            seed: self.seed.or(fallback.seed),
            threads: self.threads.or(fallback.threads),
        }
    }
}
