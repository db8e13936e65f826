mod commands;
mod config;
mod error;
mod output;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tempfrac::linsolve::Method;

use commands::{Overrides, Run};
use config::ExperimentConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "tempfrac", version, about = "Wavelet Galerkin solver for the 1-D tempered fractional Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run the predefined parameter grid `k` (1 to 5).
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=5))]
    table: Option<u8>,

    /// Output directory [default: config `out`, else `results`].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<Method>,

    /// Relative residual tolerance of the iterative solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve one problem and sample the solution on [0, 1].
    Solve,
    /// Error norms and convergence rates over a range of levels.
    Convergence,
    /// Condition numbers and CG/PCG iteration counts.
    Condition,
    /// Full spectra of the plain and preconditioned matrices.
    Eigs,
    /// Operator symbol on a frequency grid.
    Symbol,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s.to_ascii_lowercase().as_str() {
        "cg" => Ok(Method::Cg),
        "pcg" => Ok(Method::Pcg),
        "dense" => Ok(Method::Dense),
        _ => Err(format!("expected cg, pcg or dense, got {s:?}")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let ov = Overrides { out: cli.out, method: cli.method, tol: cli.tol, table: cli.table };
    let run = Run::new(cfg, ov)?;
    match cli.command {
        Command::Solve => commands::solve(&run),
        Command::Convergence => commands::convergence(&run),
        Command::Condition => commands::condition(&run),
        Command::Eigs => commands::eigs(&run),
        Command::Symbol => commands::symbol_dump(&run),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(error::EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
