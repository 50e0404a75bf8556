//! Simple undirected graphs over integer vertex ids, degree statistics, and
//! the complementary cumulative degree histogram (ccdh) in both its discrete
//! and piecewise-linear (smooth) forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(u32, u32),
    #[error("edge ({0}, {1}) has an endpoint outside 0..{2}")]
    EndpointOutOfRange(u32, u32, usize),
    #[error("ccdh counts must be positive and nonincreasing (index {0})")]
    InvalidCcdh(usize),
    #[error("smooth ccdh is only defined for d >= 1, got {0}")]
    DegreeBelowOne(f64),
    #[error("malformed edge list: {0}")]
    MalformedEdgeList(String),
}

/// A simple undirected graph: `n` vertices identified by `0..n` and a set of
/// unordered edges. No self-loops, no duplicates, no attributes.
///
/// Edges are kept sorted with `u < v`, so iteration order is canonical and
/// two graphs with the same edge set compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    /// Builds a graph, normalizing edge orientation and dropping duplicates.
    /// Self-loops and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, GraphError> {
        let mut normalized: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a, b));
            }
            if a as usize >= n || b as usize >= n {
                return Err(GraphError::EndpointOutOfRange(a, b, n));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self {
            n,
            edges: normalized,
        })
    }

    /// Builds a graph from edges already sorted lexicographically with
    /// `u < v` and no duplicates. Used by the samplers, which generate edges
    /// in canonical order.
    pub(crate) fn from_sorted_edges(n: usize, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(u, v)| u < v && (v as usize) < n));
        Self { n, edges }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    /// Per-vertex degrees, indexed by vertex id.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Serializes to the text edge-list format: a header line `n=<count>`
    /// followed by one `u v` pair per line.
    pub fn to_edge_list_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the text edge-list format produced by [`Graph::to_edge_list_text`].
    pub fn from_edge_list_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::MalformedEdgeList("empty input".into()))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| GraphError::MalformedEdgeList(format!("bad header {header:?}")))?;
        let mut edges = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| {
                tok.and_then(|t| t.parse::<u32>().ok()).ok_or_else(|| {
                    GraphError::MalformedEdgeList(format!("line {}: {line:?}", i + 2))
                })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            if it.next().is_some() {
                return Err(GraphError::MalformedEdgeList(format!(
                    "line {}: trailing fields",
                    i + 2
                )));
            }
            edges.push((u, v));
        }
        Self::new(n, edges)
    }
}

/// Number of vertices of degree exactly `k`, for each `k >= 1` that occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeHistogram {
    counts: BTreeMap<u32, usize>,
}

impl DegreeHistogram {
    pub fn counts(&self) -> &BTreeMap<u32, usize> {
        &self.counts
    }

    /// Vertices of degree exactly `k`.
    pub fn count_at(&self, k: u32) -> usize {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Total non-isolated vertices.
    pub fn non_isolated(&self) -> usize {
        self.counts.values().sum()
    }

    /// Converts to the ccdh via the suffix-sum identity N(k) = sum_{j>=k} n(j).
    pub fn to_ccdh(&self) -> Ccdh {
        let max_degree = self.counts.keys().next_back().copied().unwrap_or(0);
        let mut counts = vec![0usize; max_degree as usize];
        let mut running = 0usize;
        for k in (1..=max_degree).rev() {
            running += self.count_at(k);
            counts[(k - 1) as usize] = running;
        }
        Ccdh { counts }
    }
}

/// The complementary cumulative degree histogram: `counts[k-1]` is the number
/// of vertices of degree at least `k`, for `k` in `1..=max_degree`. Empty when
/// the graph has no edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ccdh {
    counts: Vec<usize>,
}

impl Ccdh {
    /// Validates positivity and monotonicity.
    pub fn new(counts: Vec<usize>) -> Result<Self, GraphError> {
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(GraphError::InvalidCcdh(i));
            }
            if i > 0 && counts[i - 1] < c {
                return Err(GraphError::InvalidCcdh(i));
            }
        }
        Ok(Self { counts })
    }

    pub fn empty() -> Self {
        Self { counts: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Maximum degree; 0 for an empty ccdh.
    pub fn max_degree(&self) -> usize {
        self.counts.len()
    }

    /// Discrete value N(k) for integer k >= 1; 0 beyond the maximum degree.
    pub fn discrete(&self, k: usize) -> usize {
        if k == 0 || k > self.counts.len() {
            0
        } else {
            self.counts[k - 1]
        }
    }

    /// The smooth (piecewise-linear) ccdh: exact counts at integer points,
    /// linear interpolation between consecutive integers, extended by the
    /// segment from (max_degree, N(max_degree)) down to (max_degree + 1, 0),
    /// and identically 0 from there on. An empty ccdh evaluates to 0
    /// everywhere.
    pub fn smooth_eval(&self, d: f64) -> Result<f64, GraphError> {
        if d.is_nan() || d < 1.0 {
            return Err(GraphError::DegreeBelowOne(d));
        }
        Ok(self.smooth_eval_unchecked(d))
    }

    /// As [`Ccdh::smooth_eval`] but assumes `d >= 1`.
    pub(crate) fn smooth_eval_unchecked(&self, d: f64) -> f64 {
        debug_assert!(d >= 1.0);
        let delta = self.counts.len();
        if delta == 0 || d >= (delta + 1) as f64 {
            return 0.0;
        }
        let lo = d.floor() as usize;
        let frac = d - lo as f64;
        let y0 = self.discrete(lo) as f64;
        if frac == 0.0 {
            return y0;
        }
        let y1 = self.discrete(lo + 1) as f64;
        y0 + frac * (y1 - y0)
    }
}

/// The ccdh of a graph: counts[k-1] = |{v : deg(v) >= k}|.
pub fn ccdh_of(g: &Graph) -> Ccdh {
    degree_histogram(g).to_ccdh()
}

/// Exact per-degree counts over non-isolated vertices.
pub fn degree_histogram(g: &Graph) -> DegreeHistogram {
    let mut counts = BTreeMap::new();
    for d in g.degrees() {
        if d > 0 {
            *counts.entry(d).or_insert(0) += 1;
        }
    }
    DegreeHistogram { counts }
}
