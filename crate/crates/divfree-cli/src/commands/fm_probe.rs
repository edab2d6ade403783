use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

use divfree::diagnostics::divergence_error;
use divfree::field::VectorField2;
use divfree::flowmatch::{conditional_velocity, fm_loss, interpolate, FlowSample, PathSpec};
use divfree::hodge::relative_divergence;
use divfree::io::FloFile;
use divfree::noise::{sample_divfree_noise_frame, GrfSpec, StreamNoiseSpec};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Path {
    Linear,
    Affine,
}

#[derive(Parser, Debug)]
pub struct Args {
    /// Solenoidal data trajectory (FLO1).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Path::Affine)]
    pub path: Path,
    #[arg(long, default_value_t = 1e-4)]
    pub sigma_min: f64,
    /// Number of path times probed; the grid is τ_i = i / tau_samples,
    /// uniform over [0, 1).
    #[arg(long, default_value_t = 8)]
    pub tau_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let frames = FloFile::read(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?
        .to_frames()?;
    for (i, frame) in frames.iter().enumerate() {
        let rel = relative_divergence(frame);
        if rel > 1e-6 {
            bail!("data frame {i} is not solenoidal: relative divergence {rel:.3e} exceeds 1e-6");
        }
    }
    let spec = match args.path {
        Path::Linear => PathSpec::linear(),
        Path::Affine => PathSpec::affine(args.sigma_min)?,
    };
    let grid = frames[0].grid();
    let noise_spec = StreamNoiseSpec::spectral(GrfSpec {
        seed: args.seed,
        ..GrfSpec::default()
    });
    let noise: Vec<VectorField2> = (0..frames.len() as u64)
        .map(|i| sample_divfree_noise_frame(&noise_spec, grid, i))
        .collect();

    let mut csv = String::from("tau,interpolant_div,loss_truth,loss_zero\n");
    for i in 0..args.tau_samples.max(1) {
        let tau = i as f64 / args.tau_samples.max(1) as f64;

        let mut interp_div = 0.0;
        let mut loss_truth = 0.0;
        for (u0, y) in noise.iter().zip(&frames) {
            let state = interpolate(&spec, u0, y, tau)?;
            interp_div += divergence_error(&state) / frames.len() as f64;
            // the exact conditional field toward this sample's target
            let target = y.clone();
            let model =
                move |x: &VectorField2, t: f64| conditional_velocity(&spec, x, &target, t).unwrap();
            let sample = FlowSample {
                u0: u0.clone(),
                y: y.clone(),
                tau,
            };
            loss_truth += fm_loss(&model, &spec, &[sample])? / frames.len() as f64;
        }

        let zero_model = |x: &VectorField2, _: f64| VectorField2::zeros(x.grid());
        let batch: Vec<FlowSample> = noise
            .iter()
            .zip(&frames)
            .map(|(u0, y)| FlowSample {
                u0: u0.clone(),
                y: y.clone(),
                tau,
            })
            .collect();
        let loss_zero = fm_loss(&zero_model, &spec, &batch)?;
        writeln!(csv, "{tau},{interp_div:e},{loss_truth:e},{loss_zero:e}")?;
    }
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    println!("{}", args.out.display());
    Ok(())
}
