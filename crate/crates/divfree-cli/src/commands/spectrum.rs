use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use divfree::diagnostics::{spectral_slope, spectrum, SpectrumKind};
use divfree::error::Error;
use divfree::io::FloFile;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Enstrophy,
    Energy,
}

#[derive(Parser, Debug)]
pub struct Args {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    #[arg(long, value_enum, default_value_t = Kind::Enstrophy)]
    pub kind: Kind,
    /// Shell range for the power-law fit, e.g. "4:16".
    #[arg(long, default_value = "4:16")]
    pub fit: String,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let flo = FloFile::read(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let frames = flo.to_frames()?;
    let frame = frames.get(args.frame).ok_or(Error::FrameOutOfRange {
        frame: args.frame,
        frames: frames.len(),
    })?;
    let kind = match args.kind {
        Kind::Enstrophy => SpectrumKind::Enstrophy,
        Kind::Energy => SpectrumKind::Energy,
    };
    let curve = spectrum(frame, kind);
    let (k_min, k_max) = super::parse_range(&args.fit)?;
    let slope = spectral_slope(&curve, k_min, k_max)?;

    let mut csv = String::from("shell,value\n");
    for (s, v) in curve.shells.iter().zip(&curve.values) {
        writeln!(csv, "{s},{v:e}")?;
    }
    writeln!(csv, "# slope[{k_min}:{k_max}] = {slope:.6}")?;
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    println!("{}", args.out.display());
    Ok(())
}
