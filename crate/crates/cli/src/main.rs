use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dislab_cli::{run_file, Experiment, Overrides};

/// Dislocation dynamics and confinement experiments.
#[derive(Parser)]
#[command(name = "dislab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration.
    Simulate(Common),
    /// Ensemble of runs sampled from a boundary regime.
    Montecarlo(Common),
    /// Trajectories started around the interior equilibrium.
    Cardioid(Common),
    /// Minimize the limiting energy and compare it with core-radius energies.
    Confinement(Common),
    /// Print Green's-function values at given point pairs.
    GreensProbe(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    config: PathBuf,
    /// Output directory (default: the file's `output_dir`, else `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (experiment, common) = match Cli::parse().command {
        Command::Simulate(c) => (Experiment::Simulate, c),
        Command::Montecarlo(c) => (Experiment::Montecarlo, c),
        Command::Cardioid(c) => (Experiment::Cardioid, c),
        Command::Confinement(c) => (Experiment::Confinement, c),
        Command::GreensProbe(c) => (Experiment::GreensProbe, c),
    };
    let overrides = Overrides { out: common.out, seed: common.seed, threads: common.threads };
    match run_file(experiment, &common.config, &overrides) {
        Ok(outcome) => {
            if let Some(text) = &outcome.stdout {
                print!("{text}");
            }
            match outcome.failure {
                Some(msg) => {
                    eprintln!("dislab: numerical failure: {msg} (partial outputs written)");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("dislab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
