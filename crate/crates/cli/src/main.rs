use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use habitmfg_core::config::parse_config_file;
use habitmfg_core::harness::run_command;
use habitmfg_core::Error;

const THREADS_ENV: &str = "HABITMFG_THREADS";

#[derive(Parser)]
#[command(name = "habitmfg", version, about = "Consumption games with external habit formation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the mean field equilibrium and write mfe.csv
    Solve(Args),
    /// Write the consumption, portfolio and habit panels of a parameter sweep
    Figures(Args),
    /// Estimate the habit-deviation convergence rate
    Converge(Args),
    /// Estimate Nash gaps across population sizes
    Nashgap(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed (overrides sim.seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; HABITMFG_THREADS takes precedence
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Error> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => match flag {
            Some(0) => Err(Error::Config("--threads must be at least 1".into())),
            other => Ok(other),
        },
    }
}

fn run(name: &str, args: Args) -> Result<(), Error> {
    let mut cfg = parse_config_file(&args.config)?;
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_count(args.threads)? {
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    let written = pool.install(|| run_command(name, &cfg))?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Solve(a) => ("solve", a),
        Command::Figures(a) => ("figures", a),
        Command::Converge(a) => ("converge", a),
        Command::Nashgap(a) => ("nashgap", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("habitmfg {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
