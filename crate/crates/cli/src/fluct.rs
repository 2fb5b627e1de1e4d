//! Fluctuation sample dump.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use bipartite_core::fluctuations::{sample, summarize, KernelSpec, SampleSummary};

use crate::error::RunError;

/// Writes `samples.csv` (`index,w`) and `summary.csv` (`n,mean,var,product`)
/// under `dir`.
pub fn write_samples(
    dir: &Path,
    spec: &KernelSpec,
    count: usize,
    seed: u64,
) -> Result<SampleSummary, RunError> {
    let w = sample(spec, count, seed);
    let summary = summarize(spec, &w)?;
    fs::create_dir_all(dir)?;
    let mut f = BufWriter::new(File::create(dir.join("samples.csv"))?);
    writeln!(f, "index,w")?;
    for (i, v) in w.iter().enumerate() {
        writeln!(f, "{i},{v:e}")?;
    }
    f.flush()?;
    let mut f = BufWriter::new(File::create(dir.join("summary.csv"))?);
    writeln!(f, "n,mean,var,product")?;
    writeln!(
        f,
        "{},{:e},{:e},{:e}",
        summary.n, summary.mean, summary.variance, summary.product
    )?;
    f.flush()?;
    Ok(summary)
}
