//! Run settings from flags and an optional `key = value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use crate::CliError;

/// Flags of the default `run` mode. Anything left unset falls back to the
/// config file, then to the built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Benchmark problem (zdt1, zdt2, zdt3, zdt4, zdt6, dtlz1, dtlz2)
    #[arg(long)]
    pub problem: Option<String>,
    /// Number of decision variables
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of objectives (DTLZ only)
    #[arg(long)]
    pub objectives: Option<usize>,
    /// Total true evaluations, initial design included
    #[arg(long)]
    pub budget: Option<usize>,
    /// Size of the initial Latin hypercube design
    #[arg(long)]
    pub init: Option<usize>,
    /// Points evaluated per iteration
    #[arg(long)]
    pub batch: Option<usize>,
    /// Candidate pool and inner population size
    #[arg(long)]
    pub pop: Option<usize>,
    /// Number of seeds, run as 0..count
    #[arg(long, conflicts_with = "seed_list")]
    pub seeds: Option<u64>,
    /// Comma-separated explicit seeds
    #[arg(long, value_delimiter = ',')]
    pub seed_list: Option<Vec<u64>>,
    /// Train on objective gradients with the Sobolev loss
    #[arg(long)]
    pub gradients: bool,
    /// Monte-Carlo dropout samples per prediction
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Generations of the inner evolutionary search
    #[arg(long)]
    pub inner_gens: Option<usize>,
    /// Training epochs per surrogate fit
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Weight of the gradient-matching term
    #[arg(long)]
    pub sobolev_weight: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Start the inner search from the archive's nondominated points
    #[arg(long)]
    pub seed_inner: bool,
    /// Write the final surrogate to model.txt in each run directory
    #[arg(long)]
    pub save_model: bool,
    /// Suppress per-iteration progress on stderr
    #[arg(long)]
    pub quiet: bool,
    /// File of `key = value` lines; its entries override flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub problem: String,
    pub dim: usize,
    pub objectives: Option<usize>,
    pub budget: usize,
    pub init: usize,
    pub batch: usize,
    pub pop: usize,
    pub seeds: Vec<u64>,
    pub gradients: bool,
    pub mc_samples: usize,
    pub inner_gens: usize,
    pub epochs: usize,
    pub lr: f64,
    pub sobolev_weight: f64,
    pub out: PathBuf,
    pub seed_inner: bool,
    pub save_model: bool,
    pub quiet: bool,
}

const KEYS: [&str; 19] = [
    "problem",
    "dim",
    "objectives",
    "budget",
    "init",
    "batch",
    "pop",
    "seeds",
    "seed-list",
    "gradients",
    "mc-samples",
    "inner-gens",
    "epochs",
    "lr",
    "sobolev-weight",
    "out",
    "seed-inner",
    "save-model",
    "quiet",
];

/// Parses `key = value` lines; `#` starts a comment. Keys use the flag
/// spelling, with `_` accepted for `-`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "config line {}: expected `key = value`",
                i + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "config line {}: unknown key `{}`",
                i + 1,
                k.trim()
            )));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("invalid boolean `{v}` for `{key}`"))),
    }
}

fn parse_seed_list(key: &str, v: &str) -> Result<Vec<u64>, CliError> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

impl RunArgs {
    /// Applies config-file entries on top of the flags.
    pub fn overlay(&mut self, entries: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (k, v) in entries {
            match k.as_str() {
                "problem" => self.problem = Some(v.clone()),
                "dim" => self.dim = Some(parse_value(k, v)?),
                "objectives" => self.objectives = Some(parse_value(k, v)?),
                "budget" => self.budget = Some(parse_value(k, v)?),
                "init" => self.init = Some(parse_value(k, v)?),
                "batch" => self.batch = Some(parse_value(k, v)?),
                "pop" => self.pop = Some(parse_value(k, v)?),
                "seeds" => {
                    self.seeds = Some(parse_value(k, v)?);
                    self.seed_list = None;
                }
                "seed-list" => {
                    self.seed_list = Some(parse_seed_list(k, v)?);
                    self.seeds = None;
                }
                "gradients" => self.gradients = parse_bool(k, v)?,
                "mc-samples" => self.mc_samples = Some(parse_value(k, v)?),
                "inner-gens" => self.inner_gens = Some(parse_value(k, v)?),
                "epochs" => self.epochs = Some(parse_value(k, v)?),
                "lr" => self.lr = Some(parse_value(k, v)?),
                "sobolev-weight" => self.sobolev_weight = Some(parse_value(k, v)?),
                "out" => self.out = Some(PathBuf::from(v)),
                "seed-inner" => self.seed_inner = parse_bool(k, v)?,
                "save-model" => self.save_model = parse_bool(k, v)?,
                "quiet" => self.quiet = parse_bool(k, v)?,
                _ => unreachable!("keys are checked while parsing"),
            }
        }
        Ok(())
    }

    pub fn resolve(mut self) -> Result<Settings, CliError> {
        if let Some(path) = self.config.clone() {
            let text = read_config(&path)?;
            self.overlay(&parse_config_text(&text)?)?;
        }
        let problem = self
            .problem
            .ok_or_else(|| CliError::Config("--problem is required".into()))?;
        let seeds = match (self.seed_list, self.seeds) {
            (Some(list), _) => list,
            (None, Some(count)) => (0..count).collect(),
            (None, None) => vec![0],
        };
        if seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(CliError::Config("seed list contains duplicates".into()));
        }
        let out = self
            .out
            .unwrap_or_else(|| PathBuf::from("runs").join(problem.to_ascii_lowercase()));
        Ok(Settings {
            problem,
            dim: self.dim.unwrap_or(8),
            objectives: self.objectives,
            budget: self.budget.unwrap_or(160),
            init: self.init.unwrap_or(60),
            batch: self.batch.unwrap_or(5),
            pop: self.pop.unwrap_or(100),
            seeds,
            gradients: self.gradients,
            mc_samples: self.mc_samples.unwrap_or(20),
            inner_gens: self.inner_gens.unwrap_or(100),
            epochs: self.epochs.unwrap_or(2000),
            lr: self.lr.unwrap_or(1e-3),
            sobolev_weight: self.sobolev_weight.unwrap_or(1.0),
            out,
            seed_inner: self.seed_inner,
            save_model: self.save_model,
            quiet: self.quiet,
        })
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))
}
