//! `oscint`: batch front end for the oscillatory-integral library.
//!
//! Every subcommand reads one TOML config, runs one computation, writes
//! deterministic artifacts into the output directory, and prints one
//! summary line per check.  Exit status: 0 when no check failed (a run
//! may still be INCONCLUSIVE unless `--strict`), 1 when an invariant was
//! violated or the computation broke, 2 when the config or arguments were
//! unusable.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};
use run::RunError;

#[derive(Parser)]
#[command(
    name = "oscint",
    about = "Evaluate, decompose, and apply a strongly singular oscillatory integral operator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory for artifacts (overrides `out_dir` in the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Treat INCONCLUSIVE results as failures for the exit status.
    #[arg(long)]
    strict: bool,
    /// Worker threads for the parallel lane (falls back to OSCINT_THREADS,
    /// then to one thread per core).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Audit the structural assumptions the estimates lean on.
    Check(RunArgs),
    /// Scan |m| over a frequency region with zoom refinement.
    Scan(RunArgs),
    /// Measure growth of |m| along the stationary ladder.
    Sharpness(RunArgs),
    /// Measure dyadic piece bounds and the interpolated series.
    Lp(RunArgs),
    /// Apply the operator to a seeded band-limited field, both routes.
    Apply(RunArgs),
    /// Probe the truncation limit at one point.
    Converge(RunArgs),
}

impl CliCommand {
    fn split(self) -> (Command, RunArgs) {
        match self {
            CliCommand::Check(a) => (Command::Check, a),
            CliCommand::Scan(a) => (Command::Scan, a),
            CliCommand::Sharpness(a) => (Command::Sharpness, a),
            CliCommand::Lp(a) => (Command::Lp, a),
            CliCommand::Apply(a) => (Command::Apply, a),
            CliCommand::Converge(a) => (Command::Converge, a),
        }
    }
}

fn configure_threads(args: &RunArgs) -> Result<(), RunError> {
    let requested = match args.threads {
        Some(n) => Some(n),
        None => match std::env::var("OSCINT_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                RunError::Config(format!("OSCINT_THREADS must be a positive integer, got `{v}`"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err(RunError::Config("thread count must be at least 1".into()));
        }
        if !oscint_core::set_threads(n) {
            eprintln!("oscint: note: thread pool already fixed; --threads {n} ignored");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();

    if let Err(e) = configure_threads(&args) {
        eprintln!("oscint: {e}");
        return ExitCode::from(2);
    }

    let cfg = match RunConfig::load(&args.config, command, args.out.clone()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("oscint: {e}");
            return ExitCode::from(2);
        }
    };

    match run::run(&cfg) {
        Ok(summary) => {
            print!("{}", summary.render());
            if summary.has_fail() {
                ExitCode::from(1)
            } else if args.strict && summary.has_inconclusive() {
                eprintln!("oscint: inconclusive results escalated by --strict");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e @ RunError::Config(_)) => {
            eprintln!("oscint: {e}");
            ExitCode::from(2)
        }
        Err(e @ RunError::Runtime(_)) => {
            eprintln!("oscint: {e}");
            ExitCode::from(1)
        }
    }
}
