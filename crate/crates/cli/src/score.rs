//! `rhgraph score`: apply the anomaly score to observations against a
//! baseline sample file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rhgraph::scoring::{anomaly_score, EmpiricalDistribution};

use crate::manifest::ManifestBuilder;
use crate::{read_value_csv, resolve_out_dir, write_file, CliError};

/// Scores each observation row against the empirical CDF of the baseline
/// values and writes scored.csv (label,score).
pub fn cmd_score(
    baseline_path: &Path,
    observations_path: &Path,
    out: Option<PathBuf>,
) -> Result<Vec<(String, f64)>, CliError> {
    let mut manifest = ManifestBuilder::new("score");
    manifest.input(baseline_path).input(observations_path);

    let baseline: Vec<f64> = read_value_csv(baseline_path)?
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    if baseline.is_empty() {
        return Err(CliError::Usage(format!(
            "baseline {} has no values",
            baseline_path.display()
        )));
    }
    let dist = EmpiricalDistribution::new(baseline)?;

    let observations = read_value_csv(observations_path)?;
    let mut scored = Vec::with_capacity(observations.len());
    let mut csv = String::from("label,score\n");
    for (label, value) in observations {
        let score = anomaly_score(&dist, value)?;
        let _ = writeln!(csv, "{label},{score}");
        scored.push((label, score));
    }

    let out_dir = resolve_out_dir(out);
    let path = out_dir.join("scored.csv");
    write_file(&path, &csv)?;
    manifest.output(&path);
    manifest.write(&out_dir)?;
    Ok(scored)
}
