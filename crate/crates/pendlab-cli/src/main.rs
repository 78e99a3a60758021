//! CLI for pendulum-chain simulation campaigns.
//!
//! Angles are accepted in degrees on the command line and converted once at
//! this boundary; everything inside the library is radians/SI.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pendlab::campaign::{emit_model_table, emit_phase_space, run_campaign, CampaignConfig};
use pendlab::integrator::{integrate, IntegrationConfig};
use pendlab::{ChainState, PendulumChain};

#[derive(Parser)]
#[command(name = "pendlab", version, about = "N-link pendulum chain simulation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded measurement campaign over several chain sizes.
    Campaign(CampaignArgs),
    /// Simulate one chain and export a bob's (x, y) phase-space trace.
    PhaseSpace(PhaseSpaceArgs),
    /// Emit the analytic period table (T0, Delta T, bounds) for given sizes.
    ModelTable(ModelTableArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// Chain sizes to simulate; repeatable or comma-separated.
    #[arg(long = "n", env = "PENDLAB_N", value_delimiter = ',', default_values_t = [5usize, 10, 20, 100])]
    n_values: Vec<usize>,

    #[arg(long, env = "PENDLAB_TRIALS", default_value_t = 3)]
    trials: usize,

    /// Nominal initial amplitude in degrees.
    #[arg(long = "theta0-deg", env = "PENDLAB_THETA0_DEG", default_value_t = 45.0)]
    theta0_deg: f64,

    /// Simulated duration per run [s].
    #[arg(long, env = "PENDLAB_DURATION", default_value_t = 10.0)]
    duration: f64,

    /// Recorded frames per run.
    #[arg(long, env = "PENDLAB_FRAMES", default_value_t = 1000)]
    frames: usize,

    /// Integration step [s].
    #[arg(long, env = "PENDLAB_DT", default_value_t = 1e-3)]
    dt: f64,

    #[arg(long, env = "PENDLAB_SEED", default_value_t = 42)]
    seed: u64,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long = "out", env = "PENDLAB_OUT", default_value = "pendlab-out")]
    out: PathBuf,

    /// Worker threads for the run fan-out.
    #[arg(long, env = "PENDLAB_JOBS", default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct PhaseSpaceArgs {
    /// Chain size.
    #[arg(long = "n", env = "PENDLAB_N", default_value_t = 3)]
    n: usize,

    /// Initial amplitude for every bob, in degrees.
    #[arg(long = "theta0-deg", env = "PENDLAB_THETA0_DEG", default_value_t = 45.0)]
    theta0_deg: f64,

    #[arg(long, env = "PENDLAB_DURATION", default_value_t = 10.0)]
    duration: f64,

    #[arg(long, env = "PENDLAB_FRAMES", default_value_t = 1000)]
    frames: usize,

    #[arg(long, env = "PENDLAB_DT", default_value_t = 1e-3)]
    dt: f64,

    /// One-based bob index to trace.
    #[arg(long, default_value_t = 1)]
    bob: usize,

    /// Output CSV path.
    #[arg(long = "out", env = "PENDLAB_OUT", default_value = "phase_space.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ModelTableArgs {
    /// Chain sizes; repeatable or comma-separated.
    #[arg(long = "n", env = "PENDLAB_N", value_delimiter = ',', default_values_t = [5usize, 10, 20, 100])]
    n_values: Vec<usize>,

    #[arg(long = "theta0-deg", env = "PENDLAB_THETA0_DEG", default_value_t = 45.0)]
    theta0_deg: f64,

    #[arg(long = "out", env = "PENDLAB_OUT", default_value = "model_table.csv")]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<ExitCode, pendlab::Error> {
    match cli.command {
        Command::Campaign(args) => {
            let config = CampaignConfig {
                n_values: args.n_values,
                trials: args.trials,
                theta0: args.theta0_deg.to_radians(),
                duration: args.duration,
                frames: args.frames,
                dt: args.dt,
                seed: args.seed,
                output_dir: args.out,
                jobs: args.jobs,
            };
            let result = run_campaign(&config)?;
            let failed = result.failed_runs();
            let total = result.runs.len();
            println!(
                "campaign complete: {}/{} runs ok, artifacts in {}",
                total - failed,
                total,
                config.output_dir.display()
            );
            for run in result.runs.iter().filter(|r| r.report.is_none()) {
                eprintln!(
                    "run n={} trial={} failed: {}",
                    run.n,
                    run.trial,
                    run.error.as_deref().unwrap_or("unknown")
                );
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::PhaseSpace(args) => {
            if args.bob == 0 || args.bob > args.n {
                return Err(pendlab::Error::InvalidConfig(format!(
                    "bob index {} outside 1..={}",
                    args.bob, args.n
                )));
            }
            let chain = PendulumChain::unit(args.n);
            let theta0 = args.theta0_deg.to_radians();
            let initial = ChainState::at_rest(vec![theta0; args.n])?;
            let config = IntegrationConfig::from_frames(args.duration, args.frames, args.dt)?;
            let trajectory = integrate(&chain, &initial, &config)?;
            emit_phase_space(&chain, &trajectory, args.bob - 1, &args.out)?;
            println!(
                "phase-space trace for bob {} written to {}",
                args.bob,
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ModelTable(args) => {
            emit_model_table(&args.n_values, args.theta0_deg.to_radians(), &args.out)?;
            println!("model table written to {}", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
