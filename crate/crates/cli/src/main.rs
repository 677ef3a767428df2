//! `tasep`: simulations, last-passage estimates, variational and closed-form
//! two-phase profiles, and config-driven experiments.
//!
//! Exit status: 0 on success, 1 on any error (including usage errors),
//! 2 when a `--check` gate fails.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod experiment;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{LppArgs, ProfileArgs, SimulateArgs, VariationalCommand, VerifyCommand};

#[derive(Debug, Parser)]
#[command(name = "tasep", version, about = "TASEP with discontinuous jump rates", propagate_version = true)]
struct Cli {
    /// Base seed; replica r uses a seed derived from (seed, r).
    #[arg(long, global = true, env = "TASEP_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for replicas (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Log progress to stderr (RUST_LOG overrides).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run TASEP to time t and write binned densities and currents.
    Simulate(SimulateArgs),
    /// Sample scaled wedge last-passage times T / n.
    Lpp(LppArgs),
    /// Numerical variational formulas.
    #[command(subcommand)]
    Variational(VariationalCommand),
    /// Closed-form two-phase density profile.
    Profile(ProfileArgs),
    /// Checks on computed profiles.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Config-driven experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Run the experiment described by a JSON config file.
    #[command(after_help = experiment::SCHEMA)]
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 2 if the experiment's tolerance gate fails.
        #[arg(long)]
        check: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(a, cli.seed).map(|()| true),
        Command::Lpp(a) => commands::lpp(a, cli.seed).map(|()| true),
        Command::Variational(c) => commands::variational(c).map(|()| true),
        Command::Profile(a) => commands::profile_table(a).map(|()| true),
        Command::Verify(c) => commands::verify(c),
        Command::Experiment(ExperimentCommand::Run { config, out, check }) => {
            let passed = experiment::run(&config, out, cli.seed, cli.jobs)?;
            Ok(passed || !check)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // clap uses 2 for usage errors; 2 is reserved for failed checks.
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: cannot start {} worker threads: {e}", cli.jobs);
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
