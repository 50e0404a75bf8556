//! On-disk layout for a graph sequence: a directory holding one edge-list
//! file per window (named by window start time, edges in dictionary id
//! space), the endpoint dictionary, and an index file tying them together.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{GraphSequence, IngestError, Modality, WindowGraph};
use crate::graph::Graph;

const INDEX_FILE: &str = "index.txt";
const DICTIONARY_FILE: &str = "dictionary.txt";

fn window_file_name(start: u64) -> String {
    format!("w{start:020}.txt")
}

/// Writes the sequence under `dir` (created if needed). Reruns with the same
/// sequence produce byte-identical files.
pub fn save_sequence(seq: &GraphSequence, dir: &Path) -> Result<(), IngestError> {
    fs::create_dir_all(dir)?;

    let mut dict_text = String::new();
    for name in &seq.dictionary {
        dict_text.push_str(name);
        dict_text.push('\n');
    }
    fs::write(dir.join(DICTIONARY_FILE), dict_text)?;

    let mut index = String::new();
    index.push_str(&format!("modality={}\n", seq.modality.name()));
    index.push_str(&format!("window_length={}\n", seq.window_length));
    index.push_str(&format!("step={}\n", seq.step));
    for w in &seq.windows {
        let name = window_file_name(w.start);
        index.push_str(&format!("{} {}\n", w.start, name));
        let global = global_edge_list(seq, w);
        fs::write(dir.join(name), global)?;
    }
    fs::write(dir.join(INDEX_FILE), index)?;
    Ok(())
}

fn global_edge_list(seq: &GraphSequence, w: &WindowGraph) -> String {
    let mut out = format!("n={}\n", seq.dictionary.len());
    for &(u, v) in w.graph.edges() {
        out.push_str(&format!(
            "{} {}\n",
            w.global_ids[u as usize], w.global_ids[v as usize]
        ));
    }
    out
}

/// Loads a sequence previously written by [`save_sequence`], rebuilding the
/// per-window local graphs and validating the start-time spacing.
pub fn load_sequence(dir: &Path) -> Result<GraphSequence, IngestError> {
    let index = fs::read_to_string(dir.join(INDEX_FILE))?;
    let mut modality = None;
    let mut window_length = None;
    let mut step = None;
    let mut entries: Vec<(u64, String)> = Vec::new();
    for line in index.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            match key {
                "modality" => modality = Some(Modality::from_str(value)?),
                "window_length" => {
                    window_length = Some(parse_u64("window_length", value)?);
                }
                "step" => step = Some(parse_u64("step", value)?),
                other => return Err(IngestError::Store(format!("unknown index key {other:?}"))),
            }
        } else {
            let (start, name) = line
                .split_once(' ')
                .ok_or_else(|| IngestError::Store(format!("bad index row {line:?}")))?;
            entries.push((parse_u64("window start", start)?, name.to_string()));
        }
    }
    let modality = modality.ok_or_else(|| IngestError::Store("index lacks modality".into()))?;
    let window_length =
        window_length.ok_or_else(|| IngestError::Store("index lacks window_length".into()))?;
    let step = step.ok_or_else(|| IngestError::Store("index lacks step".into()))?;

    let dict_text = fs::read_to_string(dir.join(DICTIONARY_FILE))?;
    let dictionary: Vec<String> = dict_text.lines().map(str::to_string).collect();

    let mut windows = Vec::with_capacity(entries.len());
    let mut prev_start: Option<u64> = None;
    for (start, name) in entries {
        if let Some(prev) = prev_start {
            if start != prev + step {
                return Err(IngestError::Store(format!(
                    "window starts {prev} and {start} are not {step} apart"
                )));
            }
        }
        prev_start = Some(start);
        let text = fs::read_to_string(dir.join(&name))?;
        let global = Graph::from_edge_list_text(&text)?;
        if global.vertex_count() != dictionary.len() {
            return Err(IngestError::Store(format!(
                "{name}: vertex space {} does not match the {}-entry dictionary",
                global.vertex_count(),
                dictionary.len()
            )));
        }
        windows.push(compact_window(start, global.edges()));
    }

    Ok(GraphSequence {
        modality,
        window_length,
        step,
        dictionary,
        windows,
    })
}

fn parse_u64(what: &str, value: &str) -> Result<u64, IngestError> {
    value
        .trim()
        .parse()
        .map_err(|_| IngestError::Store(format!("bad {what}: {value:?}")))
}

/// Renumbers a window's dictionary-space edges into the local contiguous
/// vertex space, in ascending dictionary-id order.
fn compact_window(start: u64, global_edges: &[(u32, u32)]) -> WindowGraph {
    use std::collections::{BTreeSet, HashMap};

    let global_ids: Vec<u32> = global_edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .collect::<BTreeSet<u32>>()
        .into_iter()
        .collect();
    let local: HashMap<u32, u32> = global_ids
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, i as u32))
        .collect();
    let edges: Vec<(u32, u32)> = global_edges
        .iter()
        .map(|&(u, v)| (local[&u], local[&v]))
        .collect();
    WindowGraph {
        start,
        graph: Graph::from_sorted_edges(global_ids.len(), edges),
        global_ids,
    }
}
