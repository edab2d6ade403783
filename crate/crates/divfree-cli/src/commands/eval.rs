use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use divfree::diagnostics::stage_report;
use divfree::io::FloFile;

#[derive(Parser, Debug)]
pub struct Args {
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference trajectory.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Inclusive frame ranges, e.g. "15:49,50:100,101:300".
    #[arg(long, default_value = "15:49")]
    pub stages: String,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let pred = FloFile::read(&args.pred)
        .with_context(|| format!("reading {}", args.pred.display()))?
        .to_frames()?;
    let reference = FloFile::read(&args.reference)
        .with_context(|| format!("reading {}", args.reference.display()))?
        .to_frames()?;
    let stages = super::parse_stages(&args.stages)?;
    let reports = stage_report(&pred, &reference, &stages)?;

    // summary rows (frame empty) followed by per-frame long-format rows
    let mut csv = String::from("stage,frame,u_mse,v_mse,div_mse,u_mse_std,v_mse_std,div_mse_std\n");
    for r in &reports {
        writeln!(
            csv,
            "{},,{:e},{:e},{:e},{:e},{:e},{:e}",
            r.label, r.u_mse, r.v_mse, r.div_mse, r.u_mse_std, r.v_mse_std, r.div_mse_std
        )?;
    }
    for r in &reports {
        for m in &r.per_frame {
            writeln!(
                csv,
                "{},{},{:e},{:e},{:e},,,",
                r.label, m.frame, m.u_mse, m.v_mse, m.div_mse
            )?;
        }
    }
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    println!("{}", args.out.display());
    Ok(())
}
