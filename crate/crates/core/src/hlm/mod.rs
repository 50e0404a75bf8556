//! Markovian evolving graphs: Chung-Lu sampling, one-step edge-resampling
//! evolution with a tunable rate, weight-vector families calibrated to target
//! aggregates, planted anomalies, and scenario simulation.

mod anomaly;
mod scenario;
mod weights;

pub use anomaly::{inject_lateral, inject_scan, prufer_decode};
pub use scenario::{
    default_alpha_grid, run_scenario, AnomalyKind, AnomalySpec, MeasureSamples, ScenarioConfig,
    ScenarioOutput, WeightFamily,
};
pub use weights::{make_bump_power_law_weights, make_power_law_weights, WeightVector};

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};
use thiserror::Error;

use crate::graph::Graph;
use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum HlmError {
    #[error("weights must be finite and nonnegative (index {0})")]
    InvalidWeight(usize),
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("edge probability at ({0}, {1}) is outside [0, 1]")]
    InvalidProbability(usize, usize),
    #[error("dimension mismatch: graph has {0} vertices, parameters have {1}")]
    DimensionMismatch(usize, usize),
    #[error("weight calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("anomaly budget {budget} exceeds the {available} free pairs at the chosen sources")]
    InsufficientCapacity { budget: usize, available: usize },
    #[error("lateral anomaly needs budget + 1 = {needed} vertices, graph has {n}")]
    TooFewVertices { needed: usize, n: usize },
    #[error("scenario config: {0}")]
    Config(String),
}

/// Symmetric matrix of per-pair edge probabilities with zero diagonal,
/// stored as the strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl ProbMatrix {
    pub fn uniform(n: usize, p: f64) -> Result<Self, HlmError> {
        Self::from_fn(n, |_, _| p)
    }

    /// Builds from a function of unordered pairs (u < v).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, HlmError> {
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                let p = f(u, v);
                if !(0.0..=1.0).contains(&p) {
                    return Err(HlmError::InvalidProbability(u, v));
                }
                upper.push(p);
            }
        }
        Ok(Self { n, upper })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        let (u, v) = (u.min(v), u.max(v));
        self.upper[u * self.n - u * (u + 1) / 2 + (v - u - 1)]
    }
}

/// Per-pair edge probabilities, either the Chung-Lu form min(1, w_u w_v / rho)
/// or an explicit matrix.
#[derive(Debug, Clone, Copy)]
pub enum EdgeProbs<'a> {
    ChungLu(&'a WeightVector),
    Matrix(&'a ProbMatrix),
}

impl EdgeProbs<'_> {
    pub fn len(&self) -> usize {
        match self {
            EdgeProbs::ChungLu(w) => w.len(),
            EdgeProbs::Matrix(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        match self {
            EdgeProbs::ChungLu(w) => w.edge_probability(u, v),
            EdgeProbs::Matrix(p) => p.get(u, v),
        }
    }
}

/// One-step evolution parameters: the per-pair resampling rate `alpha`
/// (uniform over pairs) and, optionally, an explicit probability matrix that
/// overrides the Chung-Lu probabilities.
#[derive(Debug, Clone)]
pub struct HlmParams {
    alpha: f64,
    probability_matrix: Option<ProbMatrix>,
}

impl HlmParams {
    pub fn new(alpha: f64) -> Result<Self, HlmError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(HlmError::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            probability_matrix: None,
        })
    }

    pub fn with_matrix(alpha: f64, matrix: ProbMatrix) -> Result<Self, HlmError> {
        let mut params = Self::new(alpha)?;
        params.probability_matrix = Some(matrix);
        Ok(params)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn probability_matrix(&self) -> Option<&ProbMatrix> {
        self.probability_matrix.as_ref()
    }
}

/// Samples a Chung-Lu graph: each pair {u, v} is present independently with
/// probability min(1, w_u w_v / rho).
///
/// Runs in expected O(n + m) time: vertices are visited in descending weight
/// order and candidate partners are reached by geometric skips under the
/// current probability bound, then thinned by the exact ratio.
pub fn chung_lu_sample(w: &WeightVector, rng: &mut Rng) -> Graph {
    let n = w.len();
    let rho = w.rho();
    if n < 2 || rho <= 0.0 {
        return Graph::empty(n);
    }
    let order = w.descending_order();
    let sorted: Vec<f64> = order.iter().map(|&i| w.weights()[i]).collect();

    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..n - 1 {
        if sorted[i] <= 0.0 {
            break;
        }
        let factor = sorted[i] / rho;
        let mut j = i + 1;
        let mut p = (factor * sorted[j]).min(1.0);
        while j < n && p > 0.0 {
            if p < 1.0 {
                j += geometric_skip(rng, p);
            }
            if j < n {
                let q = (factor * sorted[j]).min(1.0);
                if q >= p || rng.gen::<f64>() < q / p {
                    let a = order[i] as u32;
                    let b = order[j] as u32;
                    edges.push((a.min(b), a.max(b)));
                }
                p = q;
                j += 1;
            }
        }
    }
    edges.sort_unstable();
    Graph::from_sorted_edges(n, edges)
}

/// Samples the generic independent-edge model over an explicit matrix.
pub fn sample_edge_matrix(p: &ProbMatrix, rng: &mut Rng) -> Graph {
    let n = p.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p.get(u, v) {
                edges.push((u as u32, v as u32));
            }
        }
    }
    Graph::from_sorted_edges(n, edges)
}

/// One step of the edge-resampling evolution: every pair independently enters
/// the masking set with probability alpha; masked pairs are redrawn with
/// their model probability, unmasked pairs copy the current graph. With a
/// constant parameterization the Chung-Lu marginal is preserved at every
/// step.
pub fn hlm_step(
    g: &Graph,
    params: &HlmParams,
    w: &WeightVector,
    rng: &mut Rng,
) -> Result<Graph, HlmError> {
    let probs = match params.probability_matrix() {
        Some(m) => EdgeProbs::Matrix(m),
        None => EdgeProbs::ChungLu(w),
    };
    if probs.len() != g.vertex_count() {
        return Err(HlmError::DimensionMismatch(g.vertex_count(), probs.len()));
    }
    Ok(step_with_probs(g, params.alpha(), probs, rng))
}

/// One step of the time-varying evolution against the next-step probability
/// matrix: a present pair survives with probability (1 - alpha) + alpha p',
/// an absent pair appears with probability alpha p'.
pub fn hlm_step_timevarying(
    g: &Graph,
    alpha: f64,
    p_next: &ProbMatrix,
    rng: &mut Rng,
) -> Result<Graph, HlmError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(HlmError::InvalidAlpha(alpha));
    }
    if p_next.len() != g.vertex_count() {
        return Err(HlmError::DimensionMismatch(g.vertex_count(), p_next.len()));
    }
    Ok(step_with_probs(g, alpha, EdgeProbs::Matrix(p_next), rng))
}

fn step_with_probs(g: &Graph, alpha: f64, probs: EdgeProbs, rng: &mut Rng) -> Graph {
    let n = g.vertex_count();
    if alpha == 0.0 || n < 2 {
        return g.clone();
    }

    // Masked pairs in lexicographic order, with the pairs they resample to
    // present. Sampling the masking set by geometric skips keeps the cost at
    // O(alpha n^2 + |E|) instead of one Bernoulli draw per pair.
    let mut masked: Vec<(u32, u32)> = Vec::new();
    let mut accepted: Vec<(u32, u32)> = Vec::new();
    let mut visit = |u: usize, v: usize, rng: &mut Rng| {
        masked.push((u as u32, v as u32));
        if rng.gen::<f64>() < probs.get(u, v) {
            accepted.push((u as u32, v as u32));
        }
    };
    if alpha >= 1.0 {
        for u in 0..n {
            for v in (u + 1)..n {
                visit(u, v, rng);
            }
        }
    } else {
        for u in 0..n - 1 {
            let mut v = u + 1 + geometric_skip(rng, alpha);
            while v < n {
                visit(u, v, rng);
                v += 1 + geometric_skip(rng, alpha);
            }
        }
    }

    // Output = (E(g) minus masked) union accepted, all three lists sorted.
    let mut kept: Vec<(u32, u32)> = Vec::with_capacity(g.edge_count());
    let mut mi = 0;
    for &e in g.edges() {
        while mi < masked.len() && masked[mi] < e {
            mi += 1;
        }
        if mi < masked.len() && masked[mi] == e {
            continue;
        }
        kept.push(e);
    }
    let mut merged = Vec::with_capacity(kept.len() + accepted.len());
    let (mut i, mut j) = (0, 0);
    while i < kept.len() || j < accepted.len() {
        match (kept.get(i), accepted.get(j)) {
            (Some(&a), Some(&b)) if a <= b => {
                merged.push(a);
                i += 1;
            }
            (Some(_), Some(&b)) => {
                merged.push(b);
                j += 1;
            }
            (Some(&a), None) => {
                merged.push(a);
                i += 1;
            }
            (None, Some(&b)) => {
                merged.push(b);
                j += 1;
            }
            (None, None) => break,
        }
    }
    Graph::from_sorted_edges(n, merged)
}

/// Number of failures before the first success of a Bernoulli(p) process,
/// for p in (0, 1).
fn geometric_skip(rng: &mut Rng, p: f64) -> usize {
    debug_assert!(p > 0.0 && p < 1.0);
    let g = Geometric::new(p).expect("p in (0,1)");
    g.sample(rng) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn prob_matrix_indexing() {
        let p = ProbMatrix::from_fn(4, |u, v| (u * 10 + v) as f64 / 100.0).unwrap();
        assert_eq!(p.get(0, 1), 0.01);
        assert_eq!(p.get(1, 0), 0.01);
        assert_eq!(p.get(2, 3), 0.23);
        assert_eq!(p.get(3, 3), 0.0);
        assert!(ProbMatrix::uniform(3, 1.5).is_err());
    }

    #[test]
    fn chung_lu_zero_weights_give_empty_graph() {
        let w = WeightVector::new(vec![0.0; 8]).unwrap();
        let g = chung_lu_sample(&w, &mut rng::seeded(1));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn chung_lu_two_vertices_edge_frequency() {
        // w = (1, 1): rho = 2, edge probability 1/2; the frequency over
        // 10,000 draws stays within 3 sigma = 0.015 of one half.
        let w = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let mut rng = rng::seeded(42);
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            if chung_lu_sample(&w, &mut rng).edge_count() == 1 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.015, "freq = {freq}");
    }

    #[test]
    fn chung_lu_matches_per_pair_probabilities() {
        // Small heterogeneous weights, including a capped pair: compare
        // per-pair empirical frequencies with min(1, w_u w_v / rho).
        let w = WeightVector::new(vec![4.0, 3.0, 1.0, 0.5, 0.0]).unwrap();
        let n = w.len();
        let mut rng = rng::seeded(7);
        let trials = 40_000;
        let mut hits = vec![vec![0u32; n]; n];
        for _ in 0..trials {
            let g = chung_lu_sample(&w, &mut rng);
            for &(u, v) in g.edges() {
                hits[u as usize][v as usize] += 1;
            }
        }
        for (u, row) in hits.iter().enumerate() {
            for (v, &h) in row.iter().enumerate().skip(u + 1) {
                let p = w.edge_probability(u, v);
                let freq = h as f64 / trials as f64;
                let sigma = (p * (1.0 - p) / trials as f64).sqrt();
                assert!(
                    (freq - p).abs() <= 4.0 * sigma + 1e-12,
                    "pair ({u},{v}): freq {freq}, p {p}"
                );
            }
        }
    }

    #[test]
    fn hlm_step_alpha_zero_copies() {
        let w = WeightVector::new(vec![1.0; 6]).unwrap();
        let mut rng = rng::seeded(3);
        let g = chung_lu_sample(&w, &mut rng);
        let params = HlmParams::new(0.0).unwrap();
        let g2 = hlm_step(&g, &params, &w, &mut rng).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn hlm_step_alpha_one_is_fresh_sample() {
        // With alpha = 1 the next graph is independent of the current one:
        // starting from the complete graph, pair frequencies still match p.
        let n = 5;
        let p = 0.3;
        let matrix = ProbMatrix::uniform(n, p).unwrap();
        let params = HlmParams::with_matrix(1.0, matrix).unwrap();
        let w = WeightVector::new(vec![0.0; n]).unwrap();
        let complete = Graph::new(
            n,
            (0..n as u32).flat_map(|u| ((u + 1)..n as u32).map(move |v| (u, v))),
        )
        .unwrap();
        let mut rng = rng::seeded(11);
        let trials = 20_000;
        let mut present = 0u64;
        for _ in 0..trials {
            present += hlm_step(&complete, &params, &w, &mut rng)
                .unwrap()
                .edge_count() as u64;
        }
        let pairs = (n * (n - 1) / 2) as f64;
        let freq = present as f64 / (trials as f64 * pairs);
        let sigma = (p * (1.0 - p) / (trials as f64 * pairs)).sqrt();
        assert!((freq - p).abs() < 4.0 * sigma, "freq = {freq}");
    }

    #[test]
    fn hlm_step_flip_rate_matches_2_alpha_p_q() {
        // n = 4, uniform p = 0.3, alpha = 0.5: in stationarity each pair
        // flips with probability 2 alpha p (1 - p) = 0.21.
        let n = 4;
        let p = 0.3;
        let alpha = 0.5;
        let matrix = ProbMatrix::uniform(n, p).unwrap();
        let params = HlmParams::with_matrix(alpha, matrix.clone()).unwrap();
        let w = WeightVector::new(vec![0.0; n]).unwrap();
        let mut rng = rng::seeded(19);
        let transitions = 20_000;
        let pairs = (n * (n - 1) / 2) as f64;
        let mut flips = 0u64;
        let mut g = sample_edge_matrix(&matrix, &mut rng);
        for _ in 0..transitions {
            let g2 = hlm_step(&g, &params, &w, &mut rng).unwrap();
            flips += crate::similarity::edit_distance_aligned(&g, &g2).unwrap() as u64;
            g = g2;
        }
        let q = 2.0 * alpha * p * (1.0 - p);
        let rate = flips as f64 / (transitions as f64 * pairs);
        let sigma = (q * (1.0 - q) / (transitions as f64 * pairs)).sqrt();
        // Consecutive transitions share a graph, so the draws are not quite
        // independent; triple the tolerance rather than model the overlap.
        assert!(
            (rate - q).abs() < 3.0 * 3.0 * sigma,
            "rate = {rate}, q = {q}"
        );
    }

    #[test]
    fn timevarying_constant_matrix_reduces_to_hlm_step() {
        let n = 6;
        let matrix = ProbMatrix::uniform(n, 0.4).unwrap();
        let w = WeightVector::new(vec![0.0; n]).unwrap();
        let params = HlmParams::with_matrix(0.7, matrix.clone()).unwrap();
        let mut r1 = rng::seeded(5);
        let mut r2 = rng::seeded(5);
        let g = sample_edge_matrix(&matrix, &mut rng::seeded(99));
        let a = hlm_step(&g, &params, &w, &mut r1).unwrap();
        let b = hlm_step_timevarying(&g, 0.7, &matrix, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn timevarying_marginal_mixture() {
        // n = 3, t = 2, alpha = 0.5, P0 = 0.2, P1 = P2 = 0.8: the step-2
        // marginal is 0.25 * 0.2 + 0.25 * 0.8 + 0.5 * 0.8 = 0.65.
        let n = 3;
        let p0 = ProbMatrix::uniform(n, 0.2).unwrap();
        let p_next = ProbMatrix::uniform(n, 0.8).unwrap();
        let mut rng = rng::seeded(23);
        let trials = 30_000;
        let mut present = 0u64;
        for _ in 0..trials {
            let g0 = sample_edge_matrix(&p0, &mut rng);
            let g1 = hlm_step_timevarying(&g0, 0.5, &p_next, &mut rng).unwrap();
            let g2 = hlm_step_timevarying(&g1, 0.5, &p_next, &mut rng).unwrap();
            present += g2.edge_count() as u64;
        }
        let pairs = (n * (n - 1) / 2) as f64;
        let freq = present as f64 / (trials as f64 * pairs);
        let expect = 0.65;
        let sigma = (expect * (1.0 - expect) / (trials as f64 * pairs)).sqrt();
        assert!((freq - expect).abs() < 4.0 * sigma, "freq = {freq}");
    }

    #[test]
    fn timevarying_alpha_zero_keeps_initial_marginal() {
        let n = 4;
        let p0 = ProbMatrix::uniform(n, 0.5).unwrap();
        let p_next = ProbMatrix::uniform(n, 0.9).unwrap();
        let mut rng = rng::seeded(31);
        let g0 = sample_edge_matrix(&p0, &mut rng);
        let mut g = g0.clone();
        for _ in 0..10 {
            g = hlm_step_timevarying(&g, 0.0, &p_next, &mut rng).unwrap();
        }
        assert_eq!(g, g0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let w = WeightVector::new(vec![1.0; 4]).unwrap();
        let params = HlmParams::new(0.5).unwrap();
        let g = Graph::empty(5);
        assert_eq!(
            hlm_step(&g, &params, &w, &mut rng::seeded(0)).unwrap_err(),
            HlmError::DimensionMismatch(5, 4)
        );
    }
}
