//! The three subcommands, each turning arguments into a [`Report`].

use std::path::Path;
use std::str::FromStr;

use famova_core::scenarios::DEFAULT_SEED;
use famova_core::sim::DEFAULT_REPLICATIONS;
use famova_core::{
    anova_table, decide, decide_table, independence_bound, omnibus_f, resolve_family,
    simulate_with_workers, Design, Factor, FamilySpec, Method, PValueVector, SimConfig,
};

use crate::args::{AdjustArgs, AnovaArgs, Cli, Command, Format, SimFlags, SimulateArgs};
use crate::error::{CliError, CoreResultExt};
use crate::ingest::ingest_csv;
use crate::presets::{self, Preset, BOUND_TABLE_SIZES};
use crate::report::{BoundRow, Report, SimulationReport};

/// Exit status when a run succeeded but a preset check failed.
pub const EXIT_CHECK_FAILED: u8 = 1;

pub struct Outcome {
    pub report: Report,
    pub format: Format,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.report.all_checks_passed() {
            0
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Anova(a) => {
            let format = a.format;
            run_anova(&a).map(|report| Outcome { report, format })
        }
        Command::Adjust(a) => {
            let format = a.format;
            run_adjust(&a).map(|report| Outcome { report, format })
        }
        Command::Simulate(a) => {
            let format = a.format;
            run_simulate(a).map(|report| Outcome { report, format })
        }
    }
}

fn check_alpha(alpha: f64) -> Result<f64, CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(CliError::validation("alpha", format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Parses method names, keeping the first occurrence of each; an empty list
/// yields `default`.
pub fn parse_methods(names: &[String], default: &[Method]) -> Result<Vec<Method>, CliError> {
    let mut out = Vec::new();
    for name in names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let m = Method::from_str(name).field("method")?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        out.extend_from_slice(default);
    }
    Ok(out)
}

pub fn run_anova(args: &AnovaArgs) -> Result<Report, CliError> {
    let alpha = check_alpha(args.alpha)?;
    let ingested = ingest_csv(&args.input, &args.response, &args.factors)?;
    let design = ingested.dataset.design();
    let spec = match &args.family {
        None => FamilySpec::Exploratory,
        Some(list) => {
            let labels: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            FamilySpec::from_labels(design, &labels).field("family")?
        }
    };
    let family = resolve_family(design, &spec).field("family")?;
    let table = anova_table(&ingested.dataset, &family).field("input")?;

    let default: &[Method] = if table.is_full_family() {
        &Method::ALL
    } else {
        &Method::ALL[..4]
    };
    let methods = parse_methods(&args.methods, default)?;
    let decisions = methods
        .iter()
        .map(|&m| decide_table(m, &table, alpha).field(if m == Method::OmnibusGate { "method" } else { "input" }))
        .collect::<Result<Vec<_>, _>>()?;
    let omnibus = if table.is_full_family() {
        Some(omnibus_f(&table).field("input")?)
    } else {
        None
    };
    Ok(Report {
        anova_table: Some(table),
        omnibus,
        decisions,
        simulation: None,
    })
}

pub fn run_adjust(args: &AdjustArgs) -> Result<Report, CliError> {
    let alpha = check_alpha(args.alpha)?;
    let mut entries: Vec<(String, f64)> = Vec::new();
    if let Some(path) = &args.input {
        entries.extend(read_pvalue_file(path)?);
    }
    for (i, raw) in args.values.iter().enumerate() {
        let p = parse_p(raw, "values", &format!("argument {}", i + 1))?;
        entries.push((format!("p{}", entries.len() + 1), p));
    }
    if entries.is_empty() {
        return Err(CliError::validation("values", "no p-values given"));
    }
    let pv = PValueVector::new(entries).field("values")?;
    let methods = parse_methods(&args.methods, &[Method::Bonferroni, Method::Holm, Method::Bh])?;
    let decisions = methods
        .iter()
        .map(|&m| decide(m, &pv, alpha).field("method"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        decisions,
        ..Report::default()
    })
}

fn parse_p(raw: &str, field: &str, place: &str) -> Result<f64, CliError> {
    let p: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::parse(field, format!("{place}: `{raw}` is not a number")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::validation(
            field,
            format!("{place}: p-value {p} is outside [0, 1]"),
        ));
    }
    Ok(p)
}

/// Reads `p` or `label,p` lines. A first line whose value is not numeric is
/// taken as a header.
fn read_pvalue_file(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::io("input", format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::parse("input", e.to_string()))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let (label, raw) = match record.len() {
            0 => continue,
            1 => (None, &record[0]),
            2 => (Some(&record[0]), &record[1]),
            n => {
                return Err(CliError::parse(
                    "input",
                    format!("line {line}: expected `p` or `label,p`, found {n} fields"),
                ))
            }
        };
        if raw.is_empty() {
            continue;
        }
        if i == 0 && raw.parse::<f64>().is_err() {
            continue;
        }
        let p = parse_p(raw, "input", &format!("line {line}"))?;
        let label = label.map_or_else(|| format!("p{}", out.len() + 1), str::to_string);
        out.push((label, p));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<SimFlags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io("config", format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::parse("config", e.to_string().trim().to_string()))
}

pub fn run_simulate(args: SimulateArgs) -> Result<Report, CliError> {
    let file = match &args.config {
        Some(path) => load_config(path)?,
        None => SimFlags::default(),
    };
    let flags = args.sim.or(file);
    let seed = flags.seed.unwrap_or(DEFAULT_SEED);

    let base = match flags.preset.as_deref() {
        Some(name) => Some(presets::lookup(name, seed)?),
        None => None,
    };
    let mut config = match base {
        Some(Preset::BoundTable) => {
            let alpha = check_alpha(flags.alpha.unwrap_or(0.05))?;
            let bounds = BOUND_TABLE_SIZES
                .iter()
                .map(|&m| {
                    Ok(BoundRow {
                        m,
                        alpha,
                        bound: independence_bound(m, alpha).field("alpha")?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            return Ok(Report {
                simulation: Some(SimulationReport {
                    preset: flags.preset,
                    bounds,
                    ..SimulationReport::default()
                }),
                ..Report::default()
            });
        }
        Some(Preset::Simulation(config)) => config,
        None => SimConfig {
            design: design_from_flags(&flags)?,
            cell_means: Vec::new(),
            sigma: 1.0,
            alpha: 0.05,
            methods: Method::ALL.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            seed,
        },
    };
    if flags.preset.is_some() && (flags.levels.is_some() || flags.n_per_cell.is_some() || flags.factors.is_some()) {
        config.design = design_from_flags_over(&flags, &config.design)?;
    }
    if let Some(means) = &flags.means {
        config.cell_means = means.clone();
    } else if config.cell_means.len() != config.design.n_cells() {
        config.cell_means = vec![0.0; config.design.n_cells()];
    }
    if let Some(sigma) = flags.sigma {
        config.sigma = sigma;
    }
    if let Some(alpha) = flags.alpha {
        config.alpha = check_alpha(alpha)?;
    }
    config.methods = parse_methods(&flags.method, &config.methods)?;
    if let Some(reps) = flags.reps {
        config.replications = reps;
    }
    if config.replications == 0 {
        return Err(CliError::validation("reps", "replications must be at least 1"));
    }
    config.validate().field("config")?;

    let workers = match flags.threads {
        Some(0) => return Err(CliError::validation("threads", "threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let result = simulate_with_workers(&config, workers).field("config")?;
    let checks = match flags.preset.as_deref() {
        Some(name) => presets::checks(name, &result)?,
        None => Vec::new(),
    };
    Ok(Report {
        simulation: Some(SimulationReport {
            preset: flags.preset,
            result: Some(result),
            bounds: Vec::new(),
            checks,
        }),
        ..Report::default()
    })
}

fn design_from_flags(flags: &SimFlags) -> Result<Design, CliError> {
    let levels = flags
        .levels
        .as_ref()
        .ok_or_else(|| CliError::validation("levels", "--levels is required without a preset"))?;
    let n = flags
        .n_per_cell
        .ok_or_else(|| CliError::validation("n-per-cell", "--n-per-cell is required without a preset"))?;
    build_design(flags.factors.as_deref(), levels, n)
}

fn design_from_flags_over(flags: &SimFlags, base: &Design) -> Result<Design, CliError> {
    let base_levels: Vec<usize> = base.levels().collect();
    let base_names: Vec<String> = base.factors().iter().map(|f| f.name.clone()).collect();
    let levels = flags.levels.as_ref().unwrap_or(&base_levels);
    let names = match &flags.factors {
        Some(f) => Some(f.as_slice()),
        None if levels.len() == base_names.len() => Some(base_names.as_slice()),
        None => None,
    };
    build_design(names, levels, flags.n_per_cell.unwrap_or(base.n_per_cell()))
}

fn build_design(names: Option<&[String]>, levels: &[usize], n: usize) -> Result<Design, CliError> {
    let names: Vec<String> = match names {
        Some(names) => {
            if names.len() != levels.len() {
                return Err(CliError::validation(
                    "factors",
                    format!("{} factor names for {} factors", names.len(), levels.len()),
                ));
            }
            names.to_vec()
        }
        None => (0..levels.len())
            .map(|i| {
                char::from_u32('A' as u32 + i as u32)
                    .map_or_else(|| format!("F{}", i + 1), String::from)
            })
            .collect(),
    };
    Design::new(
        names.into_iter().zip(levels).map(|(n, &l)| Factor::new(n, l)).collect(),
        n,
    )
    .field("levels")
}
