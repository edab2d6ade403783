use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use rayon::prelude::*;

use divfree::diagnostics::divergence_error;
use divfree::field::VectorField2;
use divfree::hodge::leray_project;
use divfree::io::{manifest_path, FloFile, FrameDivergence, RunManifest};

#[derive(Parser, Debug)]
pub struct Args {
    /// Input trajectory (FLO1, C = 2).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let flo = FloFile::read(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let frames = flo.to_frames()?;

    let projected: Vec<(VectorField2, FrameDivergence)> = frames
        .par_iter()
        .enumerate()
        .map(|(i, frame)| {
            let pre = divergence_error(frame);
            let out = leray_project(frame);
            let post = divergence_error(&out);
            (
                out,
                FrameDivergence {
                    frame: i,
                    spectral: post,
                    central_difference: None,
                    pre_projection: Some(pre),
                },
            )
        })
        .collect();

    let (fields, divergence): (Vec<_>, Vec<_>) = projected.into_iter().unzip();
    let out_flo = FloFile::from_frames(&fields);
    let bytes = out_flo.to_bytes();
    std::fs::write(&args.out, &bytes)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let manifest = RunManifest::new(
        &format!("project {args:?}"),
        None,
        serde_json::json!({ "input": args.input.display().to_string() }),
        &bytes,
    )
    .with_frame_divergence(divergence);
    manifest.write(&manifest_path(&args.out))?;
    println!("{}", args.out.display());
    Ok(())
}
