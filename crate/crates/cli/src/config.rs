//! Experiment configuration: a flat `key = value` file merged with command-line
//! flags. Flags always win over the file.
//!
//! File grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value
//! ```
//!
//! Keys are the long flag names without the leading dashes (`n-list`,
//! `tol-psd`, ...); `_` and `-` are interchangeable. Boolean keys take
//! `true`/`false`. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use seqdec::ensembles::{load_ensemble, Ensemble, Preset};
use seqdec::Settings;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat key = value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset such as `two-pure-theta(0.785)` or a path to an ensemble `.json` file.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Angle for presets given without parameters.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Single block length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated block lengths.
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of codewords.
    #[arg(long = "N")]
    pub code_size: Option<usize>,
    /// Rate R; the number of codewords becomes round(2^(nR)).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Random codes per Monte Carlo estimate.
    #[arg(long)]
    pub codes: Option<usize>,
    /// Samples (codewords or trajectories) per Monte Carlo estimate.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exact evaluation (enumeration over codewords).
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Monte Carlo evaluation.
    #[arg(long)]
    pub mc: bool,
    /// Also evaluate the pretty good measurement.
    #[arg(long = "compare-pgm")]
    pub compare_pgm: bool,
    /// Largest z for the f_z sequence.
    #[arg(long)]
    pub zmax: Option<usize>,
    /// CSV output path (stdout if absent); the manifest goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Codebook JSON (array of integer arrays) instead of a sampled code.
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// Target for the smallness parameters; reports the first n meeting it.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Experiment identifier written to every row.
    #[arg(long)]
    pub id: Option<String>,
    /// Fill the wall_time column (makes reruns differ).
    #[arg(long = "wall-time")]
    pub wall_time: bool,
    #[arg(long = "tol-psd")]
    pub tol_psd: Option<f64>,
    #[arg(long = "tol-herm")]
    pub tol_herm: Option<f64>,
    #[arg(long = "max-dim")]
    pub max_dim: Option<usize>,
    #[arg(long = "enumeration-budget")]
    pub enumeration_budget: Option<u64>,
    #[arg(long = "exact-budget")]
    pub exact_budget: Option<u64>,
    #[arg(long = "phi-budget")]
    pub phi_budget: Option<u64>,
}

const KEYS: &[&str] = &[
    "ensemble",
    "theta",
    "n",
    "n-list",
    "delta",
    "N",
    "rate",
    "codes",
    "samples",
    "seed",
    "exact",
    "mc",
    "compare-pgm",
    "zmax",
    "out",
    "report",
    "code",
    "epsilon",
    "id",
    "wall-time",
    "tol-psd",
    "tol-herm",
    "max-dim",
    "enumeration-budget",
    "exact-budget",
    "phi-budget",
];

/// Parses the flat configuration grammar.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Config(format!("bad boolean `{value}` for `{key}`"))),
    }
}

/// Fills every unset flag from the file map.
fn merge(args: &mut ConfigArgs, file: &BTreeMap<String, String>) -> Result<(), CliError> {
    macro_rules! fill {
        ($field:ident, $key:expr) => {
            if args.$field.is_none() {
                if let Some(v) = file.get($key) {
                    args.$field = Some(parse_value($key, v)?);
                }
            }
        };
    }
    fill!(ensemble, "ensemble");
    fill!(theta, "theta");
    fill!(n, "n");
    fill!(delta, "delta");
    fill!(code_size, "N");
    fill!(rate, "rate");
    fill!(codes, "codes");
    fill!(samples, "samples");
    fill!(seed, "seed");
    fill!(zmax, "zmax");
    fill!(out, "out");
    fill!(report, "report");
    fill!(code, "code");
    fill!(epsilon, "epsilon");
    fill!(id, "id");
    fill!(tol_psd, "tol-psd");
    fill!(tol_herm, "tol-herm");
    fill!(max_dim, "max-dim");
    fill!(enumeration_budget, "enumeration-budget");
    fill!(exact_budget, "exact-budget");
    fill!(phi_budget, "phi-budget");
    if args.n_list.is_none() {
        if let Some(v) = file.get("n-list") {
            args.n_list = Some(
                v.split(',')
                    .map(|s| parse_value("n-list", s.trim()))
                    .collect::<Result<_, _>>()?,
            );
        }
    }
    // A mode flag on the command line overrides both mode keys in the file.
    if !args.exact && !args.mc {
        args.exact = file.get("exact").map(|v| parse_bool("exact", v)).transpose()?.unwrap_or(false);
        args.mc = file.get("mc").map(|v| parse_bool("mc", v)).transpose()?.unwrap_or(false);
    }
    if !args.compare_pgm {
        if let Some(v) = file.get("compare-pgm") {
            args.compare_pgm = parse_bool("compare-pgm", v)?;
        }
    }
    if !args.wall_time {
        if let Some(v) = file.get("wall-time") {
            args.wall_time = parse_bool("wall-time", v)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
}

/// Codebook size, given directly or through a rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeSpec {
    Fixed(usize),
    Rate(f64),
}

impl SizeSpec {
    /// `N` at block length `n`, and the rate actually used (`log2 N / n`).
    pub fn resolve(&self, n: usize) -> (usize, f64) {
        match *self {
            SizeSpec::Fixed(size) => (size, (size as f64).log2() / n as f64),
            SizeSpec::Rate(r) => {
                let size = ((n as f64 * r).exp2().round() as usize).max(1);
                (size, r)
            }
        }
    }
}

/// Fully resolved configuration; echoed into the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub ensemble: String,
    pub n_list: Vec<usize>,
    pub delta: Option<f64>,
    pub size: Option<SizeSpec>,
    pub codes: usize,
    pub samples: usize,
    pub seed: u64,
    pub mode: Mode,
    pub compare_pgm: bool,
    pub zmax: usize,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub code: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub wall_time: bool,
    pub settings: Settings,
}

impl ExperimentConfig {
    pub fn resolve(mut args: ConfigArgs, command: &str, default_mode: Mode) -> Result<Self, CliError> {
        if let Some(path) = args.config.clone() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            merge(&mut args, &parse_config_text(&text)?)?;
        }
        if args.exact && args.mc {
            return Err(CliError::Config("choose at most one of exact and mc".into()));
        }
        let mut settings = Settings::default();
        if let Some(v) = args.tol_psd {
            settings.tol_psd = v;
        }
        if let Some(v) = args.tol_herm {
            settings.tol_herm = v;
        }
        if let Some(v) = args.max_dim {
            settings.max_dim = v;
        }
        if let Some(v) = args.enumeration_budget {
            settings.enumeration_budget = v;
        }
        if let Some(v) = args.exact_budget {
            settings.exact_budget = v;
        }
        if let Some(v) = args.phi_budget {
            settings.phi_budget = v;
        }
        let ensemble = args
            .ensemble
            .clone()
            .ok_or_else(|| CliError::Config("missing `ensemble`".into()))?;
        let ensemble = match args.theta {
            Some(theta) if !ensemble.contains('(') && !is_file(&ensemble) => format!("{ensemble}({theta})"),
            Some(_) => {
                return Err(CliError::Config(
                    "`theta` only applies to presets given without parameters".into(),
                ))
            }
            None => ensemble,
        };
        let n_list = match (args.n, args.n_list.clone()) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either `n` or `n-list`, not both".into())),
            (Some(n), None) => vec![n],
            (None, Some(list)) => list,
            (None, None) => Vec::new(),
        };
        if n_list.contains(&0) {
            return Err(CliError::Config("block lengths must be positive".into()));
        }
        if let Some(d) = args.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Config(format!("`delta` must be positive, got {d}")));
            }
        }
        let size = match (args.code_size, args.rate) {
            (Some(_), Some(_)) => return Err(CliError::Config("give exactly one of `N` and `rate`".into())),
            (Some(0), None) => return Err(CliError::Config("`N` must be positive".into())),
            (Some(s), None) => Some(SizeSpec::Fixed(s)),
            (None, Some(r)) if r >= 0.0 && r.is_finite() => Some(SizeSpec::Rate(r)),
            (None, Some(r)) => return Err(CliError::Config(format!("bad rate {r}"))),
            (None, None) => None,
        };
        let mode = if args.exact {
            Mode::Exact
        } else if args.mc {
            Mode::Mc
        } else {
            default_mode
        };
        Ok(Self {
            experiment_id: args.id.clone().unwrap_or_else(|| command.to_string()),
            ensemble,
            n_list,
            delta: args.delta,
            size,
            codes: args.codes.unwrap_or(200),
            samples: args.samples.unwrap_or(10_000),
            seed: args.seed.unwrap_or(0),
            mode,
            compare_pgm: args.compare_pgm,
            zmax: args.zmax.unwrap_or(4),
            out: args.out.clone(),
            report: args.report.clone(),
            code: args.code.clone(),
            epsilon: args.epsilon,
            wall_time: args.wall_time,
            settings,
        })
    }

    pub fn build_ensemble(&self) -> Result<Ensemble, CliError> {
        if is_file(&self.ensemble) {
            Ok(load_ensemble(
                Path::new(&self.ensemble),
                self.settings.tol_herm,
                self.settings.tol_psd,
            )?)
        } else {
            Ok(Preset::parse(&self.ensemble)?.build()?)
        }
    }

    pub fn require_n_list(&self) -> Result<&[usize], CliError> {
        if self.n_list.is_empty() {
            Err(CliError::Config("missing `n` or `n-list`".into()))
        } else {
            Ok(&self.n_list)
        }
    }

    pub fn require_delta(&self) -> Result<f64, CliError> {
        self.delta.ok_or_else(|| CliError::Config("missing `delta`".into()))
    }

    pub fn require_size(&self) -> Result<SizeSpec, CliError> {
        self.size
            .ok_or_else(|| CliError::Config("give exactly one of `N` and `rate`".into()))
    }
}

fn is_file(spec: &str) -> bool {
    spec.ends_with(".json")
}
