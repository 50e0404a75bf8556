//! Graph similarity measures: Relative Hausdorff distance (smooth and
//! discrete), Kolmogorov-Smirnov distance and the two-sample KS test, and
//! aligned edit distance.

use std::io::Write;

use thiserror::Error;

use crate::graph::{Ccdh, Graph};

/// Absolute tolerance for real comparisons inside the RH minimization.
pub const RH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("directional RH distance requires a nonempty source ccdh")]
    EmptySource,
    #[error("KS distance requires nonempty ccdhs")]
    EmptyCcdh,
    #[error("vertex count {0} is smaller than the ccdh head count {1}")]
    InvalidNormalizer(usize, usize),
    #[error("two-sample KS test requires nonempty samples")]
    EmptySamples,
    #[error("samples contain a non-finite value")]
    NonFiniteSample,
    #[error("aligned edit distance requires equal vertex counts ({0} vs {1})")]
    MismatchedVertexCount(usize, usize),
}

/// Result of a (symmetric) Relative Hausdorff computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhResult {
    /// Directional distance from the first graph to the second.
    pub forward: f64,
    /// Directional distance from the second graph to the first.
    pub backward: f64,
    /// max(forward, backward).
    pub value: f64,
}

/// One linear piece of a smooth ccdh between degrees `x0` and `x1 = x0 + 1`,
/// with counts `y0 >= y1`. The extension piece ends at (max_degree + 1, 0).
#[derive(Debug, Clone, Copy)]
struct Segment {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Segment {
    fn slope(&self) -> f64 {
        (self.y1 - self.y0) / (self.x1 - self.x0)
    }

    fn eval(&self, x: f64) -> f64 {
        self.y0 + (x - self.x0) * self.slope()
    }
}

/// Segments of the smooth ccdh, from degree 1 through (max_degree + 1, 0).
/// Empty when the ccdh is empty.
fn segments(c: &Ccdh) -> Vec<Segment> {
    let delta = c.max_degree();
    let mut out = Vec::with_capacity(delta);
    for k in 1..=delta {
        out.push(Segment {
            x0: k as f64,
            x1: (k + 1) as f64,
            y0: c.discrete(k) as f64,
            y1: c.discrete(k + 1) as f64,
        });
    }
    out
}

/// Objective for one target point: both fractional errors measured against
/// the source point `(d, f)`.
fn point_objective(d: f64, f: f64, d_prime: f64, g_value: f64) -> f64 {
    let degree_err = (d_prime - d).abs() / d;
    let count_err = (f - g_value).abs() / f;
    degree_err.max(count_err)
}

/// Minimum of the point objective over one segment of the target curve, by
/// closed-form candidate enumeration: segment endpoints, the apex of each
/// absolute-value term, and the crossings where the two terms are equal.
fn min_over_segment(d: f64, f: f64, seg: &Segment) -> f64 {
    let mut best = f64::INFINITY;
    let mut consider = |x: f64| {
        if x >= seg.x0 - RH_TOLERANCE && x <= seg.x1 + RH_TOLERANCE {
            let x = x.clamp(seg.x0, seg.x1);
            let v = point_objective(d, f, x, seg.eval(x));
            if v < best {
                best = v;
            }
        }
    };

    consider(seg.x0);
    consider(seg.x1);
    // Apex of the degree-error term.
    consider(d);
    // Apex of the count-error term: where the segment crosses the count f.
    let m = seg.slope();
    if m != 0.0 {
        consider(seg.x0 + (f - seg.y0) / m);
    }
    // Crossings |x - d| / d = |f - g(x)| / f, linearized over both sign
    // choices: f (x - d) = +/- d (f - y0 - m (x - x0)).
    for sign in [1.0, -1.0] {
        let denom = f + sign * d * m;
        if denom.abs() > RH_TOLERANCE {
            let numer = f * d + sign * d * (f - seg.y0 + m * seg.x0);
            consider(numer / denom);
        }
    }
    best
}

/// Per-point minimal epsilon against the whole smooth target curve.
fn smooth_point_epsilon(d: usize, f: usize, target: &[Segment], target_delta: usize) -> f64 {
    let d = d as f64;
    let f = f as f64;
    if target.is_empty() {
        // The target curve is identically zero: d' = d costs only the count
        // error |f - 0| / f = 1.
        return 1.0;
    }
    // Start from the cheap candidate d' = clamp(d, 1, delta + 1); every other
    // candidate with a larger degree error cannot beat it.
    let right_end = (target_delta + 1) as f64;
    let clamped = d.clamp(1.0, right_end);
    let seg_idx = |x: f64| -> usize {
        let k = x.floor() as usize;
        k.clamp(1, target_delta) - 1
    };
    let start = &target[seg_idx(clamped)];
    let mut best = point_objective(d, f, clamped, start.eval(clamped.clamp(start.x0, start.x1)));
    // Beyond the extension the curve is zero; the cheapest such point is the
    // nearest one.
    let tail_x = right_end.max(d);
    best = best.min(point_objective(d, f, tail_x, 0.0));

    // Only segments intersecting the window |d' - d| <= best * d can improve.
    let lo = seg_idx((d * (1.0 - best)).max(1.0));
    let hi = seg_idx((d * (1.0 + best)).min(right_end));
    for seg in &target[lo..=hi] {
        if seg.x1 < d * (1.0 - best) - RH_TOLERANCE || seg.x0 > d * (1.0 + best) + RH_TOLERANCE {
            continue;
        }
        let v = min_over_segment(d, f, seg);
        if v < best {
            best = v;
        }
    }
    best
}

/// Smooth directional Relative Hausdorff distance from `f` to `g`: the least
/// epsilon such that every integer point of `f`'s ccdh is matched by some real
/// point of `g`'s smooth ccdh within epsilon-fractional error in both degree
/// and count.
pub fn rh_directional_smooth(f: &Ccdh, g: &Ccdh) -> Result<f64, SimilarityError> {
    if f.is_empty() {
        return Err(SimilarityError::EmptySource);
    }
    let target = segments(g);
    let mut eps = 0.0f64;
    for d in 1..=f.max_degree() {
        let e = smooth_point_epsilon(d, f.discrete(d), &target, g.max_degree());
        if e > eps {
            eps = e;
        }
    }
    Ok(eps)
}

/// Discrete directional Relative Hausdorff distance: as the smooth form but
/// with d' restricted to the integers 1..=max_degree(g)+1, where the ccdh of
/// `g` is taken as 0 at max_degree(g)+1. Never smaller than the smooth form.
pub fn rh_directional_discrete(f: &Ccdh, g: &Ccdh) -> Result<f64, SimilarityError> {
    if f.is_empty() {
        return Err(SimilarityError::EmptySource);
    }
    let candidates: Vec<(f64, f64)> = (1..=g.max_degree() + 1)
        .map(|k| (k as f64, g.discrete(k) as f64))
        .collect();
    let mut eps = 0.0f64;
    for d in 1..=f.max_degree() {
        let fd = f.discrete(d) as f64;
        let point = candidates
            .iter()
            .map(|&(dp, gv)| point_objective(d as f64, fd, dp, gv))
            .fold(f64::INFINITY, f64::min);
        if point > eps {
            eps = point;
        }
    }
    Ok(eps)
}

/// Smooth Relative Hausdorff distance: the max of the two directional
/// distances. Conventions for empty ccdhs: both empty gives 0; exactly one
/// empty gives 1 (the nonempty direction is forced to epsilon = 1 by the
/// count condition against the zero curve).
pub fn rh_smooth(f: &Ccdh, g: &Ccdh) -> RhResult {
    let forward = if f.is_empty() {
        0.0
    } else {
        rh_directional_smooth(f, g).expect("nonempty source")
    };
    let backward = if g.is_empty() {
        0.0
    } else {
        rh_directional_smooth(g, f).expect("nonempty source")
    };
    RhResult {
        forward,
        backward,
        value: forward.max(backward),
    }
}

/// Discrete Relative Hausdorff distance with the same empty-ccdh conventions
/// as [`rh_smooth`].
pub fn rh_discrete(f: &Ccdh, g: &Ccdh) -> RhResult {
    let forward = if f.is_empty() {
        0.0
    } else {
        rh_directional_discrete(f, g).expect("nonempty source")
    };
    let backward = if g.is_empty() {
        0.0
    } else {
        rh_directional_discrete(g, f).expect("nonempty source")
    };
    RhResult {
        forward,
        backward,
        value: forward.max(backward),
    }
}

/// Convenience: smooth RH distance between two graphs.
pub fn rh_between(f: &Graph, g: &Graph) -> RhResult {
    rh_smooth(&crate::graph::ccdh_of(f), &crate::graph::ccdh_of(g))
}

/// Kolmogorov-Smirnov distance between two graph ccdhs, normalized by the
/// graphs' vertex counts: max over integer x >= 1 of |F(x)/n - G(x)/m|.
pub fn ks_distance(f: &Ccdh, n: usize, g: &Ccdh, m: usize) -> Result<f64, SimilarityError> {
    if f.is_empty() || g.is_empty() {
        return Err(SimilarityError::EmptyCcdh);
    }
    if n < f.discrete(1) {
        return Err(SimilarityError::InvalidNormalizer(n, f.discrete(1)));
    }
    if m < g.discrete(1) {
        return Err(SimilarityError::InvalidNormalizer(m, g.discrete(1)));
    }
    let n = n as f64;
    let m = m as f64;
    let mut max = 0.0f64;
    for x in 1..=f.max_degree().max(g.max_degree()) {
        let diff = (f.discrete(x) as f64 / n - g.discrete(x) as f64 / m).abs();
        if diff > max {
            max = diff;
        }
    }
    Ok(max)
}

/// KS distance between two graphs, normalizing by their vertex counts
/// (isolated vertices included).
pub fn ks_distance_graphs(f: &Graph, g: &Graph) -> Result<f64, SimilarityError> {
    ks_distance(
        &crate::graph::ccdh_of(f),
        f.vertex_count(),
        &crate::graph::ccdh_of(g),
        g.vertex_count(),
    )
}

/// Two-sample KS test applied to two graph degree distributions: the
/// statistic is the graph KS distance and the p-value formula uses the
/// vertex counts as the sample sizes.
pub fn ks_test_graphs(f: &Graph, g: &Graph) -> Result<KsTestResult, SimilarityError> {
    let statistic = ks_distance_graphs(f, g)?;
    let n = f.vertex_count();
    let m = g.vertex_count();
    let nm = (n * m) as f64 / (n + m) as f64;
    let p_value = (-2.0 * statistic * statistic * nm).exp().clamp(0.0, 1.0);
    Ok(KsTestResult {
        statistic,
        p_value,
        n,
        m,
    })
}

/// Outcome of the two-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTestResult {
    /// Sup-distance between the two empirical CDFs.
    pub statistic: f64,
    /// exp(-2 D^2 n m / (n + m)), clamped to [0, 1].
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

impl KsTestResult {
    /// The rejection threshold c(alpha) * sqrt((n + m) / (n m)) with
    /// c(alpha) = sqrt(-log(alpha) / 2).
    pub fn rejection_threshold(&self, alpha: f64) -> f64 {
        let c = (-0.5 * alpha.ln()).sqrt();
        c * ((self.n + self.m) as f64 / (self.n * self.m) as f64).sqrt()
    }

    /// Whether the null hypothesis is rejected at the given level.
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.statistic > self.rejection_threshold(alpha)
    }
}

/// Two-sample KS test between empirical samples. The statistic is the sup
/// difference of the two empirical CDFs evaluated at every sample point.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTestResult, SimilarityError> {
    if a.is_empty() || b.is_empty() {
        return Err(SimilarityError::EmptySamples);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(SimilarityError::NonFiniteSample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.total_cmp(q));
    ys.sort_unstable_by(|p, q| p.total_cmp(q));

    let n = xs.len();
    let m = ys.len();
    let mut i = 0;
    let mut j = 0;
    let mut statistic = 0.0f64;
    while i < n || j < m {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > statistic {
            statistic = diff;
        }
    }

    let nm = (n * m) as f64 / (n + m) as f64;
    let p_value = (-2.0 * statistic * statistic * nm).exp().clamp(0.0, 1.0);
    Ok(KsTestResult {
        statistic,
        p_value,
        n,
        m,
    })
}

/// Edit distance between two graphs under the identity vertex alignment: the
/// size of the symmetric difference of their edge sets. Equals unit-cost
/// graph edit distance when the alignment is fixed.
pub fn edit_distance_aligned(g1: &Graph, g2: &Graph) -> Result<usize, SimilarityError> {
    if g1.vertex_count() != g2.vertex_count() {
        return Err(SimilarityError::MismatchedVertexCount(
            g1.vertex_count(),
            g2.vertex_count(),
        ));
    }
    // Both edge lists are sorted; count the merge mismatches.
    let a = g1.edges();
    let b = g2.edges();
    let mut i = 0;
    let mut j = 0;
    let mut flips = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                flips += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                flips += 1;
                j += 1;
            }
        }
    }
    Ok(flips + (a.len() - i) + (b.len() - j))
}

/// Writes a pairwise smooth-RH distance matrix as CSV, with rows and columns
/// indexed by the given labels (typically window start timestamps).
pub fn write_pairwise_rh_csv<W: Write>(
    labels: &[u64],
    ccdhs: &[Ccdh],
    mut out: W,
) -> std::io::Result<()> {
    assert_eq!(labels.len(), ccdhs.len());
    let matrix = pairwise_rh_matrix(ccdhs);
    write!(out, "t")?;
    for l in labels {
        write!(out, ",{l}")?;
    }
    writeln!(out)?;
    for (l, row) in labels.iter().zip(&matrix) {
        write!(out, "{l}")?;
        for v in row {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Symmetric matrix of pairwise smooth RH distances with zero diagonal.
/// Pairs are independent, so the upper triangle is computed in parallel.
pub fn pairwise_rh_matrix(ccdhs: &[Ccdh]) -> Vec<Vec<f64>> {
    use rayon::prelude::*;

    let k = ccdhs.len();
    let upper: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..k)
                .map(|j| rh_smooth(&ccdhs[i], &ccdhs[j]).value)
                .collect()
        })
        .collect();
    let mut matrix = vec![vec![0.0; k]; k];
    for i in 0..k {
        for (off, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            matrix[i][j] = v;
            matrix[j][i] = v;
        }
    }
    matrix
}
