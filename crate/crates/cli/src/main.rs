use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use twoflux_cli::{cmd_classify, cmd_riemann, cmd_simulate, cmd_verify, composition_error, CliError, ProblemConfig};

/// Two-flux conservation laws with an interface at x = 0: classification,
/// shadow-wave Riemann solutions, Godunov runs and delta-mass checks.
#[derive(Parser)]
#[command(name = "twoflux", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify both fluxes, the geometry and the shadow-wave table row.
    Classify(Io),
    /// Build the wave fan and sample it on the simulation grid.
    Riemann(Io),
    /// Run the Godunov scheme and dump snapshots.
    Simulate(Io),
    /// Compare the simulated singular mass with the exact one.
    Verify(Io),
}

#[derive(Args)]
struct Io {
    /// Problem config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

fn print<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let io = match &cli.cmd {
        Cmd::Classify(io) | Cmd::Riemann(io) | Cmd::Simulate(io) | Cmd::Verify(io) => io,
    };
    let config = ProblemConfig::load(&io.config)?;
    match cli.cmd {
        Cmd::Classify(_) => {
            let c = cmd_classify(&config, &io.out)?;
            print(&c);
            composition_error(&c)?;
        }
        Cmd::Riemann(_) => print(&cmd_riemann(&config, &io.out)?),
        Cmd::Simulate(_) => print(&cmd_simulate(&config, &io.out)?),
        Cmd::Verify(_) => print(&cmd_verify(&config, &io.out)?.0),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
