//! `rhgraph heatmap`: all-pairs RH distances over a window range, plus the
//! Gaussian-kernel similarity matrix.

use std::path::{Path, PathBuf};

use rhgraph::ingest::{load_sequence, pairwise_heatmap, Heatmap};

use crate::manifest::ManifestBuilder;
use crate::{matrix_csv, resolve_out_dir, write_file, CliError};

/// Computes the heatmap for windows [from, to) of the stored sequence and
/// writes rh_matrix.csv and similarity_matrix.csv.
pub fn cmd_heatmap(
    sequence_dir: &Path,
    from: usize,
    to: usize,
    out: Option<PathBuf>,
) -> Result<Heatmap, CliError> {
    let mut manifest = ManifestBuilder::new("heatmap");
    manifest.input(sequence_dir);
    let seq = load_sequence(sequence_dir)?;
    let heatmap = pairwise_heatmap(&seq, from..to)?;

    let out_dir = resolve_out_dir(out);
    let rh_path = out_dir.join("rh_matrix.csv");
    let sim_path = out_dir.join("similarity_matrix.csv");
    write_file(&rh_path, &matrix_csv(&heatmap.starts, &heatmap.rh))?;
    write_file(&sim_path, &matrix_csv(&heatmap.starts, &heatmap.similarity))?;
    manifest.output(&rh_path).output(&sim_path);
    manifest.write(&out_dir)?;
    Ok(heatmap)
}
