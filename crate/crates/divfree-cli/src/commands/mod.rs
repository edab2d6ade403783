pub mod eval;
pub mod fm_probe;
pub mod noise;
pub mod project;
pub mod simulate;
pub mod spectrum;

use anyhow::{bail, Result};

/// Parse `"a:b"` into an inclusive index range.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        bail!("expected START:END, got {s:?}");
    }
    let start: usize = parts[0].trim().parse()?;
    let end: usize = parts[1].trim().parse()?;
    if start > end {
        bail!("range start {start} exceeds end {end}");
    }
    Ok((start, end))
}

/// Parse `"a:b,c:d,…"` into a list of inclusive ranges.
pub fn parse_stages(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',').map(parse_range).collect()
}
