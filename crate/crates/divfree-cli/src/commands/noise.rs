use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use divfree::diagnostics::divergence_error;
use divfree::grid::Grid;
use divfree::io::{manifest_path, FloFile, FrameDivergence, RunManifest};
use divfree::noise::{
    central_difference_divergence, sample_divfree_noise_frame, GrfSpec, NoiseMode,
    StreamNoiseSpec,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Spectral,
    Fd,
}

#[derive(Parser, Debug)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Mode::Spectral)]
    pub mode: Mode,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First frame index in the seed's noise stream. Frame `offset + i` of a
    /// seed is the same field no matter how the work is windowed, so
    /// `--frames 10` equals `--frames 5` plus `--frames 5 --frame-offset 5`.
    #[arg(long, default_value_t = 0)]
    pub frame_offset: u64,
    /// Smoothing width in grid cells (fd mode).
    #[arg(long, default_value_t = 2.0)]
    pub blur_sigma: f64,
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 7.0)]
    pub tau: f64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let grid = Grid::new(args.grid)?;
    let spec = StreamNoiseSpec {
        mode: match args.mode {
            Mode::Spectral => NoiseMode::Spectral,
            Mode::Fd => NoiseMode::FiniteDifference,
        },
        grf: GrfSpec::new(args.alpha, args.tau, args.seed)?,
        blur_sigma: args.blur_sigma,
    };

    let frames: Vec<_> = (0..args.frames as u64)
        .into_par_iter()
        .map(|i| sample_divfree_noise_frame(&spec, grid, args.frame_offset + i))
        .collect();

    let divergence: Vec<FrameDivergence> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let fd = matches!(spec.mode, NoiseMode::FiniteDifference).then(|| {
                let d = central_difference_divergence(f);
                d.values().iter().map(|v| v * v).sum::<f64>() / d.values().len() as f64
            });
            FrameDivergence {
                frame: i,
                spectral: divergence_error(f),
                central_difference: fd,
                pre_projection: None,
            }
        })
        .collect();

    let flo = FloFile::from_frames(&frames);
    let bytes = flo.to_bytes();
    std::fs::write(&args.out, &bytes)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let manifest = RunManifest::new(
        &format!("noise {args:?}"),
        Some(args.seed),
        serde_json::to_value(&spec)?,
        &bytes,
    )
    .with_frame_divergence(divergence);
    manifest.write(&manifest_path(&args.out))?;
    println!("{}", args.out.display());
    Ok(())
}
