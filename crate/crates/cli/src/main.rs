//! `ndweak`: readout distributions of weak measurements with a dispersive,
//! decohering probe.
//!
//! Exit codes: 0 ok, 1 i/o, 2 parse error, 3 parameter out of range,
//! 4 numerical-consistency failure.

mod compute;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ndweak_core::verification;

use crate::config::{RunConfig, SweepParameter};
use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "ndweak",
    version,
    about = "Weak-measurement readout with a dispersive, decohering probe"
)]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "NDWEAK_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct IoArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute every requested quantity for one configuration.
    Run {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Repeat a run over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        io: IoArgs,

        #[arg(long, value_enum)]
        param: SweepParameter,

        /// Comma-separated values, e.g. `0.1,0.2,0.4`.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Run the built-in verification checks.
    Verify {
        #[arg(long, default_value_t = verification::DEFAULT_SEED)]
        seed: u64,
    },
}

fn run_command(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))?;

    match cli.command {
        Command::Run { io } => {
            let cfg = RunConfig::from_path(&io.config)?;
            let out = compute::run(&cfg)?;
            for note in &out.notes {
                println!("{note}");
            }
            let files = output::write_tables(&io.out, &out.tables, io.format)?;
            if cfg.outputs.sidecar {
                output::write_sidecar(&io.out, "run", &cfg, &files, json!({}))?;
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep { io, param, values } => {
            let cfg = RunConfig::from_path(&io.config)?;
            let table = compute::sweep(&cfg, param, &values)?;
            let files = output::write_tables(&io.out, std::slice::from_ref(&table), io.format)?;
            if cfg.outputs.sidecar {
                let extra = json!({ "parameter": param.name(), "values": values });
                output::write_sidecar(&io.out, "sweep", &cfg, &files, extra)?;
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
        }
        Command::Verify { seed } => {
            let checks = verification::run_all(seed)?;
            let mut failed = 0;
            for c in &checks {
                println!("{}", c.report());
                if !c.passed() {
                    failed += 1;
                }
            }
            if failed > 0 {
                return Err(CliError::Numerical(format!(
                    "{failed} of {} checks failed",
                    checks.len()
                )));
            }
            println!("all {} checks passed", checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ndweak: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
