use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use rayon::prelude::*;

use divfree::diagnostics::divergence_error;
use divfree::grid::Grid;
use divfree::io::{manifest_path, FloFile, FrameDivergence, RunManifest};
use divfree::noise::GrfSpec;
use divfree::rng::{derive_seed, derive_unit_uniform, StreamDomain};
use divfree::solver::{simulate, SolverConfig, Trajectory};

#[derive(Parser, Debug)]
pub struct Args {
    /// Kinematic viscosity.
    #[arg(long, default_value_t = 1e-3)]
    pub nu: f64,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Solver time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Solver steps per stored snapshot.
    #[arg(long, default_value_t = 1000)]
    pub record_every: usize,
    /// Stored snapshots per trajectory (including the initial one).
    #[arg(long, default_value_t = 50)]
    pub snapshots: usize,
    /// GRF spectral decay exponent for the initial vorticity.
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    /// GRF inverse length scale.
    #[arg(long, default_value_t = 7.0)]
    pub tau: f64,
    /// Forcing phase in radians; when omitted, each trajectory draws its own
    /// phase deterministically from the seed.
    #[arg(long)]
    pub forcing_phase: Option<f64>,
    /// Forcing amplitude.
    #[arg(long, default_value_t = 0.1 * std::f64::consts::SQRT_2)]
    pub forcing_amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trajectories: usize,
    /// Output path; with several trajectories, files are numbered
    /// `<stem>_000.flo`, `<stem>_001.flo`, …
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let grid = Grid::new(args.grid)?;
    let outputs: Vec<(PathBuf, Trajectory)> = (0..args.trajectories)
        .into_par_iter()
        .map(|t| -> Result<(PathBuf, Trajectory)> {
            let config = trajectory_config(&args, grid, t as u64)?;
            let traj = simulate(&config)
                .with_context(|| format!("trajectory {t} failed"))?;
            Ok((output_path(&args.out, args.trajectories, t), traj))
        })
        .collect::<Result<_>>()?;

    for (path, traj) in &outputs {
        let flo = FloFile::from_frames(&traj.frames);
        let bytes = flo.to_bytes();
        std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        let divergence = traj
            .frames
            .iter()
            .enumerate()
            .map(|(i, f)| FrameDivergence {
                frame: i,
                spectral: divergence_error(f),
                central_difference: None,
                pre_projection: None,
            })
            .collect();
        let manifest = RunManifest::new(
            &format!("simulate {args:?}"),
            Some(args.seed),
            serde_json::to_value(&traj.config)?,
            &bytes,
        )
        .with_frame_divergence(divergence);
        manifest.write(&manifest_path(path))?;
        println!("{}", path.display());
    }
    Ok(())
}

/// Per-trajectory configuration: the initial-condition seed and (when not
/// fixed by flag) the forcing phase derive deterministically from the base
/// seed and the trajectory index, so any subset of trajectories can be
/// regenerated in isolation.
fn trajectory_config(args: &Args, grid: Grid, index: u64) -> Result<SolverConfig> {
    let init_seed = derive_seed(args.seed, StreamDomain::TrajectoryInit, index);
    let phase = match args.forcing_phase {
        Some(p) => p,
        None => {
            derive_unit_uniform(args.seed, StreamDomain::ForcingPhase, index)
                * 2.0
                * std::f64::consts::PI
        }
    };
    Ok(SolverConfig {
        nu: args.nu,
        dt: args.dt,
        record_every: args.record_every,
        snapshots: args.snapshots,
        forcing_amplitude: args.forcing_amplitude,
        forcing_phase: phase,
        grid,
        seed: args.seed,
        init: GrfSpec::new(args.alpha, args.tau, init_seed)?,
    })
}

fn output_path(base: &PathBuf, total: usize, index: usize) -> PathBuf {
    if total == 1 {
        return base.clone();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let ext = base
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "flo".into());
    base.with_file_name(format!("{stem}_{index:03}.{ext}"))
}
