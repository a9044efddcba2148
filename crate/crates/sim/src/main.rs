use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hybridgate_sim::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "sim", version, about = "Hybrid optical/microwave CZ gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Add Fock-space oracle columns to the truth table.
    #[arg(long, global = true)]
    oracle_check: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Fidelity and efficiency for the four basis inputs.
    TruthTable,
    /// Averaged fidelity over one or two configured sweep axes.
    Sweep,
    /// Sampled input and output mode shapes.
    Modes,
    /// Mean-field versus linear cavity response for the configured drive amplitudes.
    ValidateLinearization,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let command = match cli.command {
        Cmd::TruthTable => Command::TruthTable { oracle_check: cli.oracle_check },
        Cmd::Sweep => Command::Sweep,
        Cmd::Modes => Command::Modes,
        Cmd::ValidateLinearization => Command::ValidateLinearization,
    };
    let csv = run(command, &config, cli.jobs.map(usize::from))?;
    match &cli.out {
        Some(path) => std::fs::write(path, csv).map_err(|source| CliError::Output { path: path.clone(), source }),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source }),
    }
}
