//! Result rows, CSV writing and run manifests.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | experiment_id | `--id`, or the subcommand name |
//! | n | block length (blank for per-ensemble metrics) |
//! | delta | typicality slack |
//! | N | number of codewords |
//! | R | rate `log2(N) / n` |
//! | chi | Holevo information of the ensemble |
//! | metric | one of [`METRICS`], optionally followed by `:` and an index |
//! | value | metric value |
//! | stderr | standard error for Monte Carlo values |
//! | wall_time | seconds since the command started; blank unless `--wall-time` |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Accepted metric names. Names ending in `:` take an index suffix.
pub const METRICS: &[&str] = &[
    // capacity
    "chi",
    "entropy",
    "state_entropy:",
    // typicality
    "rank_p",
    "avg_atypical_mass",
    "cond_atypical_mass",
    "f0_gap",
    "sandwich_lower_margin",
    "sandwich_upper_margin",
    "sandwich_holds",
    "n0",
    // decode
    "avg_err_exact",
    "avg_err_bruteforce",
    "avg_err_mc",
    "pgm_avg_err_exact",
    "pgm_avg_err_mc",
    "code_err:",
    "pgm_code_err:",
    // bounds
    "f:",
    "a_exact",
    "a_expansion",
    "a_lower",
    "success_exact",
    "log_y",
    "chi_eff",
    "verdict_below",
    "bound_vacuous",
    "w0_margin",
    "compressed_w0_margin",
    "q_margin",
    "orderings_hold",
    "w1_q_trace:",
    // trajectories
    "traj_freq:",
    "exact_prob:",
    "z_score:",
    "max_abs_z",
    "resamples",
];

pub fn is_known_metric(metric: &str) -> bool {
    match metric.split_once(':') {
        None => METRICS.contains(&metric),
        Some((base, index)) => {
            !index.is_empty()
                && index.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                && METRICS.iter().any(|m| m.strip_suffix(':') == Some(base))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CsvRow<'a> {
    experiment_id: &'a str,
    n: Option<usize>,
    delta: Option<f64>,
    #[serde(rename = "N")]
    code_size: Option<usize>,
    #[serde(rename = "R")]
    rate: Option<f64>,
    chi: f64,
    metric: &'a str,
    value: f64,
    stderr: Option<f64>,
    wall_time: Option<f64>,
}

/// Row context shared by several metrics.
#[derive(Debug, Clone, Copy, Default)]
pub struct RowKey {
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub code_size: Option<usize>,
    pub rate: Option<f64>,
}

pub struct ResultWriter {
    inner: csv::Writer<Box<dyn Write>>,
    experiment_id: String,
    chi: f64,
    start: Option<Instant>,
    rows: usize,
}

impl ResultWriter {
    pub fn new(config: &ExperimentConfig, chi: f64) -> Result<Self, CliError> {
        let sink: Box<dyn Write> = match &config.out {
            Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
            None => Box::new(std::io::stdout()),
        };
        Ok(Self {
            inner: csv::Writer::from_writer(sink),
            experiment_id: config.experiment_id.clone(),
            chi,
            start: config.wall_time.then(Instant::now),
            rows: 0,
        })
    }

    pub fn write(&mut self, key: RowKey, metric: &str, value: f64, stderr: Option<f64>) -> Result<(), CliError> {
        if !is_known_metric(metric) {
            return Err(CliError::Output(format!("unknown metric `{metric}`")));
        }
        self.inner.serialize(CsvRow {
            experiment_id: &self.experiment_id,
            n: key.n,
            delta: key.delta,
            code_size: key.code_size,
            rate: key.rate,
            chi: self.chi,
            metric,
            value,
            stderr,
            wall_time: self.start.map(|s| s.elapsed().as_secs_f64()),
        })?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize, CliError> {
        self.inner.flush()?;
        Ok(self.rows)
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
}

/// `<out>.manifest.json` next to the CSV file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(config: &ExperimentConfig, command: &str) -> Result<Option<PathBuf>, CliError> {
    let Some(out) = &config.out else {
        return Ok(None);
    };
    let path = manifest_path(out);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: config.seed,
        config,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(Some(path))
}

pub fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Output(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}
