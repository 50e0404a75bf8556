//! Event-log ingestion: parsing the five per-modality record formats,
//! building sliding-window graph sequences over interned endpoints, and the
//! before/after change-point experiment around marked events.

mod experiment;
mod persist;

pub use experiment::{
    before_after_experiment, before_after_experiment_cached, pairwise_heatmap, Heatmap,
};
pub use persist::{load_sequence, save_sequence};

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{ccdh_of, Ccdh, Graph};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unknown modality {0:?} (expected auth, authfail, process, dns, or flow)")]
    UnknownModality(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("window step must be positive")]
    ZeroStep,
    #[error("window length {0} is not a positive multiple of step {1}")]
    WindowStepMismatch(u64, u64),
    #[error("lag {0} is not a positive multiple of the sequence step {1}")]
    BadLag(u64, u64),
    #[error("window length {0} must exceed twice the lag {1}")]
    WindowTooShortForLag(u64, u64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("window range is empty")]
    EmptyRange,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("sequence store: {0}")]
    Store(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// The five event-log modalities and their comma-separated line layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Auth,
    AuthFail,
    Process,
    Dns,
    Flow,
}

impl Modality {
    pub const ALL: [Modality; 5] = [
        Modality::Auth,
        Modality::AuthFail,
        Modality::Process,
        Modality::Dns,
        Modality::Flow,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Modality::Auth => "auth",
            Modality::AuthFail => "authfail",
            Modality::Process => "process",
            Modality::Dns => "dns",
            Modality::Flow => "flow",
        }
    }

    /// Expected comma-separated field count for this modality's records.
    fn field_count(&self) -> usize {
        match self {
            Modality::Auth | Modality::AuthFail => 9,
            Modality::Process => 5,
            Modality::Dns => 3,
            Modality::Flow => 9,
        }
    }

    /// Zero-based positions of the two endpoint fields.
    fn endpoint_fields(&self) -> (usize, usize) {
        match self {
            // time, sourceUser@domain, destUser@domain, ...
            Modality::Auth | Modality::AuthFail => (1, 2),
            // time, user@domain, computer, process name, start/end
            Modality::Process => (2, 3),
            // time, source computer, computer resolved
            Modality::Dns => (1, 2),
            // time, duration, source computer, source port, dest computer, ...
            Modality::Flow => (2, 4),
        }
    }
}

impl FromStr for Modality {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auth" => Ok(Modality::Auth),
            "authfail" | "auth_fail" | "auth-fail" => Ok(Modality::AuthFail),
            "process" => Ok(Modality::Process),
            "dns" => Ok(Modality::Dns),
            "flow" => Ok(Modality::Flow),
            other => Err(IngestError::UnknownModality(other.to_string())),
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One parsed event: a timestamp in epoch seconds and the two endpoint
/// identifiers relevant to the modality. Endpoint strings are kept verbatim;
/// in particular `user@domain` is a single identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub timestamp: u64,
    pub modality: Modality,
    pub endpoint_a: String,
    pub endpoint_b: String,
}

/// A parse failure for one input line; the stream continues past it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Parsed events plus the malformed lines that were skipped.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<EventRecord>,
    pub errors: Vec<LineError>,
}

fn parse_line(
    line: &str,
    lineno: usize,
    modality: Modality,
) -> Result<Option<EventRecord>, LineError> {
    let fields: Vec<&str> = line.split(',').collect();
    let expected = modality.field_count();
    if fields.len() != expected {
        return Err(LineError {
            line: lineno,
            message: format!("expected {expected} fields, found {}", fields.len()),
        });
    }
    let timestamp: u64 = fields[0].parse().map_err(|_| LineError {
        line: lineno,
        message: format!("bad timestamp {:?}", fields[0]),
    })?;
    if modality == Modality::AuthFail && fields[8] != "Fail" {
        // Not malformed, just not a failed authentication.
        return Ok(None);
    }
    let (a, b) = modality.endpoint_fields();
    let endpoint_a = fields[a];
    let endpoint_b = fields[b];
    if endpoint_a.is_empty() || endpoint_b.is_empty() {
        return Err(LineError {
            line: lineno,
            message: "empty endpoint".to_string(),
        });
    }
    Ok(Some(EventRecord {
        timestamp,
        modality,
        endpoint_a: endpoint_a.to_string(),
        endpoint_b: endpoint_b.to_string(),
    }))
}

/// Parses a line-oriented event stream leniently: malformed lines are
/// recorded with their line numbers and skipped, never aborting the stream.
pub fn parse_events(reader: impl BufRead, modality: Modality) -> Result<ParseOutcome, IngestError> {
    let mut outcome = ParseOutcome::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.is_empty() {
            continue;
        }
        match parse_line(trimmed, i + 1, modality) {
            Ok(Some(record)) => outcome.records.push(record),
            Ok(None) => {}
            Err(e) => outcome.errors.push(e),
        }
    }
    Ok(outcome)
}

/// Strict parsing for curated fixtures: the first malformed line aborts.
pub fn parse_events_strict(
    reader: impl BufRead,
    modality: Modality,
) -> Result<Vec<EventRecord>, IngestError> {
    let outcome = parse_events(reader, modality)?;
    if let Some(e) = outcome.errors.first() {
        return Err(IngestError::Malformed {
            line: e.line,
            message: e.message.clone(),
        });
    }
    Ok(outcome.records)
}

/// One window of a sequence: the graph over the endpoints seen in the
/// window (locally renumbered in ascending dictionary order) and the
/// dictionary ids those local vertices refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGraph {
    pub start: u64,
    pub graph: Graph,
    /// Local vertex id -> dictionary id; strictly ascending.
    pub global_ids: Vec<u32>,
}

/// A time-ordered sequence of window graphs for one modality, together with
/// the endpoint dictionary shared by all windows. Consecutive window starts
/// differ by exactly `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSequence {
    pub modality: Modality,
    pub window_length: u64,
    pub step: u64,
    /// Dictionary id -> endpoint string, in first-seen order.
    pub dictionary: Vec<String>,
    pub windows: Vec<WindowGraph>,
}

impl GraphSequence {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn start_times(&self) -> impl Iterator<Item = u64> + '_ {
        self.windows.iter().map(|w| w.start)
    }

    /// Index of the window starting exactly at `t`, if any.
    pub fn index_of(&self, t: u64) -> Option<usize> {
        let first = self.windows.first()?.start;
        if t < first || !(t - first).is_multiple_of(self.step) {
            return None;
        }
        let idx = ((t - first) / self.step) as usize;
        (idx < self.windows.len()).then_some(idx)
    }

    /// The window graph re-expressed over the full dictionary vertex space,
    /// for shared-alignment comparisons such as edit distance.
    pub fn global_graph(&self, index: usize) -> Graph {
        let w = &self.windows[index];
        let edges = w
            .graph
            .edges()
            .iter()
            .map(|&(u, v)| (w.global_ids[u as usize], w.global_ids[v as usize]));
        Graph::new(self.dictionary.len(), edges).expect("dictionary ids are in range")
    }

    /// Aligned edit distance between two windows, under the shared
    /// dictionary alignment.
    pub fn edit_distance(&self, i: usize, j: usize) -> usize {
        crate::similarity::edit_distance_aligned(&self.global_graph(i), &self.global_graph(j))
            .expect("same dictionary")
    }

    /// Ccdhs of every window, in order.
    pub fn ccdhs(&self) -> Vec<Ccdh> {
        self.windows.iter().map(|w| ccdh_of(&w.graph)).collect()
    }
}

fn intern_id(name: &str, intern: &mut HashMap<String, u32>, dictionary: &mut Vec<String>) -> u32 {
    if let Some(&id) = intern.get(name) {
        return id;
    }
    let id = dictionary.len() as u32;
    dictionary.push(name.to_string());
    intern.insert(name.to_string(), id);
    id
}

/// Builds the sliding-window graph sequence: window starts are the multiples
/// of `step` from the first event's aligned-down timestamp through the last
/// event's timestamp, and each window's graph has one vertex per distinct
/// endpoint and one edge per distinct endpoint pair among the events with
/// timestamps in [start, start + window_length).
///
/// Events whose two endpoints coincide would form self-loops and are
/// skipped. Event multiplicity within a window is irrelevant: the edge set
/// is a set.
pub fn build_windows(
    events: &[EventRecord],
    modality: Modality,
    window_length: u64,
    step: u64,
) -> Result<GraphSequence, IngestError> {
    if step == 0 {
        return Err(IngestError::ZeroStep);
    }
    if window_length == 0 || !window_length.is_multiple_of(step) {
        return Err(IngestError::WindowStepMismatch(window_length, step));
    }

    let mut ordered: Vec<&EventRecord> = events
        .iter()
        .filter(|e| e.endpoint_a != e.endpoint_b)
        .collect();
    ordered.sort_by_key(|e| e.timestamp);

    let mut dictionary: Vec<String> = Vec::new();
    let mut intern: HashMap<String, u32> = HashMap::new();
    let mut pairs: Vec<(u64, (u32, u32))> = Vec::with_capacity(ordered.len());
    for e in &ordered {
        let a = intern_id(&e.endpoint_a, &mut intern, &mut dictionary);
        let b = intern_id(&e.endpoint_b, &mut intern, &mut dictionary);
        pairs.push((e.timestamp, (a.min(b), a.max(b))));
    }

    let mut windows = Vec::new();
    if let (Some(first), Some(last)) = (ordered.first(), ordered.last()) {
        let t0 = first.timestamp / step * step;
        let last_start = last.timestamp / step * step;
        let mut lo = 0usize;
        let mut hi = 0usize;
        let mut start = t0;
        loop {
            while lo < pairs.len() && pairs[lo].0 < start {
                lo += 1;
            }
            while hi < pairs.len() && pairs[hi].0 < start + window_length {
                hi += 1;
            }
            windows.push(window_graph(start, &pairs[lo..hi]));
            if start == last_start {
                break;
            }
            start += step;
        }
    }

    Ok(GraphSequence {
        modality,
        window_length,
        step,
        dictionary,
        windows,
    })
}

fn window_graph(start: u64, pairs: &[(u64, (u32, u32))]) -> WindowGraph {
    let distinct: BTreeSet<(u32, u32)> = pairs.iter().map(|&(_, p)| p).collect();
    let global_ids: Vec<u32> = distinct
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
    let edges: Vec<(u32, u32)> = distinct
        .into_iter()
        .map(|(u, v)| (local[&u], local[&v]))
        .collect();
    WindowGraph {
        start,
        graph: Graph::from_sorted_edges(global_ids.len(), edges),
        global_ids,
    }
}

/// Timestamps of known marked (red team) events, sorted and de-duplicated.
/// The metadata columns of the source rows (compromised identifiers and the
/// like) are kept as parsed but play no role in the experiments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RedTeamMarks {
    timestamps: Vec<u64>,
    records: Vec<(u64, String)>,
}

impl RedTeamMarks {
    pub fn new(timestamps: Vec<u64>) -> Self {
        let records = timestamps.iter().map(|&t| (t, String::new())).collect();
        Self::from_records(records)
    }

    fn from_records(records: Vec<(u64, String)>) -> Self {
        let mut timestamps: Vec<u64> = records.iter().map(|&(t, _)| t).collect();
        timestamps.sort_unstable();
        timestamps.dedup();
        Self {
            timestamps,
            records,
        }
    }

    /// Parses a CSV of timestamps: the first field of each line must be an
    /// epoch-second integer; remaining fields are carried as metadata.
    pub fn from_csv_text(text: &str) -> Result<Self, IngestError> {
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (first, rest) = match line.split_once(',') {
                Some((f, r)) => (f, r),
                None => (line, ""),
            };
            let t: u64 = first.parse().map_err(|_| IngestError::Malformed {
                line: i + 1,
                message: format!("bad mark timestamp {first:?}"),
            })?;
            records.push((t, rest.to_string()));
        }
        Ok(Self::from_records(records))
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.timestamps
    }

    /// The source rows in input order: timestamp plus the untouched
    /// metadata columns.
    pub fn records(&self) -> &[(u64, String)] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Whether any mark lies in the closed interval [lo, hi].
    pub fn any_in_closed(&self, lo: u64, hi: u64) -> bool {
        let i = self.timestamps.partition_point(|&t| t < lo);
        i < self.timestamps.len() && self.timestamps[i] <= hi
    }

    /// Whether any mark lies in the open interval (lo, hi).
    pub fn any_in_open(&self, lo: u64, hi: u64) -> bool {
        let i = self.timestamps.partition_point(|&t| t <= lo);
        i < self.timestamps.len() && self.timestamps[i] < hi
    }
}
