//! Command-line interface: simulate networks, fit the covariate model,
//! bootstrap the fitted parameters and score clusterings.

mod commands;
mod dataset;
mod errors;
mod report;

use clap::{Parser, Subcommand};

use errors::CliResult;

#[derive(Parser)]
#[command(
    name = "netpls",
    version,
    about = "Profile least squares estimation of network structure with edge covariates"
)]
struct Cli {
    /// Worker threads for multi-start fits, mixture grids and bootstrap
    /// replicates (falls back to NETPLS_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known ground truth.
    Simulate(commands::simulate::SimulateArgs),
    /// Fit the model to a dataset and write a report directory.
    Fit(commands::fit::FitArgs),
    /// Bootstrap a completed fit and write confidence intervals.
    Bootstrap(commands::bootstrap::BootstrapArgs),
    /// Compare clusterings (and optionally coefficients) against a reference.
    Eval(commands::eval::EvalArgs),
}

fn init_threads(flag: Option<usize>) -> CliResult<()> {
    let from_env = std::env::var("NETPLS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(errors::CliError::Config("--threads must be positive".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| errors::CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    init_threads(cli.threads)?;
    match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Bootstrap(args) => commands::bootstrap::run(args),
        Command::Eval(args) => commands::eval::run(args),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
