//! `rhgraph ingest`: parse an event log (plain or gzip-compressed) and
//! persist the windowed graph sequence.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;

use rhgraph::ingest::{build_windows, parse_events, save_sequence, IngestError, Modality};

use crate::manifest::ManifestBuilder;
use crate::{resolve_out_dir, write_file, CliError};

/// Opens the log, transparently decompressing `.gz` files.
fn open_log(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(flate2::read::GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

#[derive(Debug, Serialize)]
pub struct IngestReport {
    pub modality: String,
    pub window_length: u64,
    pub step: u64,
    pub records: usize,
    pub malformed: usize,
    /// First few malformed lines, for triage.
    pub first_errors: Vec<String>,
    pub windows: usize,
    pub endpoints: usize,
}

/// Parses `log_path` as the given modality, builds the window sequence, and
/// persists it under the output directory. Strict mode aborts on the first
/// malformed line; otherwise they are counted and reported.
pub fn cmd_ingest(
    log_path: &Path,
    modality: Modality,
    window_length: u64,
    step: u64,
    strict: bool,
    out: Option<PathBuf>,
) -> Result<IngestReport, CliError> {
    let mut manifest = ManifestBuilder::new("ingest");
    manifest.input(log_path);

    let outcome = parse_events(open_log(log_path)?, modality)?;
    if strict {
        if let Some(e) = outcome.errors.first() {
            return Err(IngestError::Malformed {
                line: e.line,
                message: e.message.clone(),
            }
            .into());
        }
    }

    let seq = build_windows(&outcome.records, modality, window_length, step)?;
    let out_dir = resolve_out_dir(out);
    save_sequence(&seq, &out_dir)?;
    println!("wrote {} windows under {}", seq.len(), out_dir.display());

    let report = IngestReport {
        modality: modality.name().to_string(),
        window_length,
        step,
        records: outcome.records.len(),
        malformed: outcome.errors.len(),
        first_errors: outcome
            .errors
            .iter()
            .take(10)
            .map(|e| format!("line {}: {}", e.line, e.message))
            .collect(),
        windows: seq.len(),
        endpoints: seq.dictionary.len(),
    };
    let report_path = out_dir.join("ingest_report.json");
    write_file(&report_path, &serde_json::to_string_pretty(&report)?)?;
    manifest.output(&report_path);
    manifest.write(&out_dir)?;
    Ok(report)
}
