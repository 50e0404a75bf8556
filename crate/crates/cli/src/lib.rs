//! Command implementations behind the `rhgraph` binary: simulate, ingest,
//! experiment, heatmap, and score. Each command validates its inputs, writes
//! plain CSV/JSON outputs into one directory, and drops a run manifest
//! alongside them.

pub mod experiment;
pub mod heatmap;
pub mod ingest_cmd;
pub mod manifest;
pub mod score;
pub mod simulate;

pub use experiment::cmd_experiment;
pub use heatmap::cmd_heatmap;
pub use ingest_cmd::cmd_ingest;
pub use score::cmd_score;
pub use simulate::cmd_simulate;

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RHGRAPH_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Hlm(#[from] rhgraph::hlm::HlmError),
    #[error(transparent)]
    Ingest(#[from] rhgraph::ingest::IngestError),
    #[error(transparent)]
    Scoring(#[from] rhgraph::scoring::ScoringError),
    #[error(transparent)]
    Similarity(#[from] rhgraph::similarity::SimilarityError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Output directory: the explicit flag, else $RHGRAPH_OUT, else the current
/// directory.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Writes a labeled square matrix as CSV: header row and leading column
/// carry the labels.
pub(crate) fn matrix_csv(labels: &[u64], matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("t");
    for l in labels {
        out.push_str(&format!(",{l}"));
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&l.to_string());
        for v in &matrix[i] {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parses a CSV of scalar observations: the value is the last field of each
/// nonempty line; the first field doubles as the row label when there is
/// more than one field, else the 0-based row index labels it.
pub(crate) fn read_value_csv(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let value: f64 = fields.last().unwrap().trim().parse().map_err(|_| {
            CliError::Config(format!("{}:{}: bad value {line:?}", path.display(), i + 1))
        })?;
        let label = if fields.len() > 1 {
            fields[0].trim().to_string()
        } else {
            rows.len().to_string()
        };
        rows.push((label, value));
    }
    Ok(rows)
}
