//! `divfree` — batch front door for the incompressible-flow toolkit.
//!
//! Subcommands: `simulate` (dataset generation), `project` (frame-wise Leray
//! projection), `noise` (divergence-free noise sampling), `eval` (staged
//! rollout metrics), `spectrum` (shell spectra with slope fit), and
//! `fm-probe` (flow-matching objective audit).
//!
//! Exit codes: 0 success, 2 input/contract error, 3 numerical failure.

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "divfree", version, about = "Spectral toolkit for divergence-free 2D flow")]
struct Cli {
    /// Worker threads (overrides the DIVFREE_THREADS environment variable;
    /// defaults to the rayon heuristic). Outputs are byte-identical for any
    /// thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground-truth trajectories with the pseudo-spectral solver.
    Simulate(commands::simulate::Args),
    /// Apply the Leray projection to every frame of a trajectory file.
    Project(commands::project::Args),
    /// Sample divergence-free Gaussian noise frames.
    Noise(commands::noise::Args),
    /// Staged MSE/divergence evaluation of a prediction against a reference.
    Eval(commands::eval::Args),
    /// Enstrophy or energy spectrum of one frame, with a power-law fit.
    Spectrum(commands::spectrum::Args),
    /// Audit the flow-matching objective on a solenoidal dataset.
    FmProbe(commands::fm_probe::Args),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();

    let threads = cli.threads.or_else(|| {
        std::env::var("DIVFREE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // ignore the error if a pool already exists (tests call run() twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Project(args) => commands::project::run(args),
        Command::Noise(args) => commands::noise::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Spectrum(args) => commands::spectrum::run(args),
        Command::FmProbe(args) => commands::fm_probe::run(args),
    };

    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// 3 for failures of the numerics (unstable steps, ODE breakdown), 2 for
/// everything else (bad flags, malformed files, contract violations).
fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(e) = err.downcast_ref::<divfree::Error>() {
        if e.is_numerical() {
            return 3;
        }
    }
    2
}
