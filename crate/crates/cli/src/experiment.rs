//! `rhgraph experiment`: the before/after KS table over a parameter grid of
//! window lengths and lags, across one or more persisted sequences.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rhgraph::ingest::{before_after_experiment_cached, load_sequence, IngestError, RedTeamMarks};

use crate::manifest::ManifestBuilder;
use crate::{resolve_out_dir, write_file, CliError};

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentCell {
    pub modality: String,
    pub ell: u64,
    pub delta: u64,
    pub status: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub n_before: Option<usize>,
    pub n_after: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub marks: usize,
    pub cells: Vec<ExperimentCell>,
}

/// Runs the grid (sequence x ell x delta) and writes experiment.csv and
/// experiment.json. Cells without enough data are marked, not dropped.
pub fn cmd_experiment(
    sequence_dirs: &[PathBuf],
    marks_path: &Path,
    ells: &[u64],
    deltas: &[u64],
    out: Option<PathBuf>,
) -> Result<ExperimentReport, CliError> {
    if sequence_dirs.is_empty() || ells.is_empty() || deltas.is_empty() {
        return Err(CliError::Usage(
            "experiment needs at least one --seq, --ell, and --delta".into(),
        ));
    }
    let mut manifest = ManifestBuilder::new("experiment");
    manifest.input(marks_path);
    let marks = RedTeamMarks::from_csv_text(&std::fs::read_to_string(marks_path)?)?;

    let mut cells = Vec::new();
    for dir in sequence_dirs {
        manifest.input(dir);
        let seq = load_sequence(dir)?;
        let ccdhs = seq.ccdhs();
        for &ell in ells {
            for &delta in deltas {
                let cell = match before_after_experiment_cached(&seq, &ccdhs, &marks, ell, delta) {
                    Ok(r) => ExperimentCell {
                        modality: seq.modality.name().to_string(),
                        ell,
                        delta,
                        status: "ok".into(),
                        statistic: Some(r.statistic),
                        p_value: Some(r.p_value),
                        n_before: Some(r.n),
                        n_after: Some(r.m),
                    },
                    Err(IngestError::InsufficientData(_)) => ExperimentCell {
                        modality: seq.modality.name().to_string(),
                        ell,
                        delta,
                        status: "insufficient_data".into(),
                        statistic: None,
                        p_value: None,
                        n_before: None,
                        n_after: None,
                    },
                    Err(e) => return Err(e.into()),
                };
                cells.push(cell);
            }
        }
    }

    let mut csv = String::from("modality,ell,delta,status,statistic,p_value,n_before,n_after\n");
    for c in &cells {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let optn = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            c.modality,
            c.ell,
            c.delta,
            c.status,
            opt(c.statistic),
            opt(c.p_value),
            optn(c.n_before),
            optn(c.n_after)
        );
    }

    let report = ExperimentReport {
        marks: marks.timestamps().len(),
        cells,
    };
    let out_dir = resolve_out_dir(out);
    let csv_path = out_dir.join("experiment.csv");
    let json_path = out_dir.join("experiment.json");
    write_file(&csv_path, &csv)?;
    write_file(&json_path, &serde_json::to_string_pretty(&report)?)?;
    manifest.output(&csv_path).output(&json_path);
    manifest.write(&out_dir)?;
    Ok(report)
}
