//! `seqdec` experiment harness.
//!
//! Exit codes: 0 success, 2 configuration error, 3 budget exceeded,
//! 4 invariant violation, 1 other failures.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigArgs, ExperimentConfig, Mode};
use error::CliError;
use output::{write_manifest, ResultWriter};

#[derive(Debug, Parser)]
#[command(name = "seqdec", version, about = "Sequential typical-subspace decoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Holevo information and entropies of an ensemble.
    Capacity(ConfigArgs),
    /// Typical-projector ranks, atypical masses and sandwich margins.
    Typicality(ConfigArgs),
    /// Code-averaged decoding error, exact or Monte Carlo.
    Decode(ConfigArgs),
    /// The f_z sequence, success bounds, threshold verdict and operator orderings.
    Bounds(ConfigArgs),
    /// Collapse-trajectory histograms against exact measurement probabilities.
    Trajectories(ConfigArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args, default_mode): (&str, ConfigArgs, Mode) = match cli.command {
        Command::Capacity(a) => ("capacity", a, Mode::Exact),
        Command::Typicality(a) => ("typicality", a, Mode::Exact),
        Command::Decode(a) => ("decode", a, Mode::Mc),
        Command::Bounds(a) => ("bounds", a, Mode::Exact),
        Command::Trajectories(a) => ("trajectories", a, Mode::Mc),
    };
    let cfg = ExperimentConfig::resolve(args, name, default_mode)?;
    let ensemble = cfg.build_ensemble()?;
    let mut out = ResultWriter::new(&cfg, ensemble.chi())?;
    match name {
        "capacity" => commands::capacity(&cfg, &ensemble, &mut out)?,
        "typicality" => commands::typicality(&cfg, &ensemble, &mut out)?,
        "decode" => commands::decode(&cfg, &ensemble, &mut out)?,
        "bounds" => commands::bounds(&cfg, &ensemble, &mut out)?,
        "trajectories" => commands::trajectories(&cfg, &ensemble, &mut out)?,
        _ => unreachable!("all subcommands handled"),
    }
    let rows = out.finish()?;
    if let Some(path) = write_manifest(&cfg, name)? {
        eprintln!("[seqdec] wrote {rows} rows; manifest {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(hint) = err.guidance() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
