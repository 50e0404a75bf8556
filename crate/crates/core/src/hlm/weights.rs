//! Chung-Lu weight vectors and the two parametric degree-weight families:
//! a discrete power law, and a power law with a binomial "hub" bump at high
//! degrees. Both families are calibrated to hit target aggregates (expected
//! edge count, maximum expected degree) by deterministic bisection.

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use super::HlmError;
use crate::rng;
use crate::rng::Rng;

/// Per-vertex nonnegative weights with the cached sum rho. The edge
/// probability used everywhere is min(1, w_u w_v / rho).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
    rho: f64,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self, HlmError> {
        for (i, &x) in w.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(HlmError::InvalidWeight(i));
            }
        }
        let rho = w.iter().sum();
        Ok(Self { w, rho })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn edge_probability(&self, u: usize, v: usize) -> f64 {
        if u == v || self.rho <= 0.0 {
            return 0.0;
        }
        (self.w[u] * self.w[v] / self.rho).min(1.0)
    }

    /// Vertex indices sorted by weight descending (ties by index).
    pub(crate) fn descending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.w.len()).collect();
        order.sort_by(|&a, &b| self.w[b].total_cmp(&self.w[a]).then(a.cmp(&b)));
        order
    }

    /// Expected degree of every vertex: sum over partners of the capped edge
    /// probability. O(n log n) via the sorted weight prefix.
    pub fn expected_degrees(&self) -> Vec<f64> {
        let n = self.w.len();
        if n == 0 || self.rho <= 0.0 {
            return vec![0.0; n];
        }
        let mut sorted = self.w.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for &s in &sorted {
            prefix.push(prefix.last().unwrap() + s);
        }
        let total: f64 = prefix[n];

        self.w
            .iter()
            .map(|&wu| {
                if wu <= 0.0 {
                    return 0.0;
                }
                // Partners with w_v > rho / w_u contribute a capped 1.
                let threshold = self.rho / wu;
                let capped = sorted.partition_point(|&s| s > threshold);
                let over_all = capped as f64 + wu * (total - prefix[capped]) / self.rho;
                over_all - (wu * wu / self.rho).min(1.0)
            })
            .collect()
    }

    /// Expected number of edges: half the sum of expected degrees.
    pub fn expected_edges(&self) -> f64 {
        self.expected_degrees().iter().sum::<f64>() / 2.0
    }

    pub fn max_expected_degree(&self) -> f64 {
        self.expected_degrees().into_iter().fold(0.0f64, f64::max)
    }
}

/// Inverse-CDF table for the discrete power law P(k) proportional to
/// k^(-exponent) on k = 1, 2, 3, ... The table is truncated where the
/// remaining tail mass drops below 1e-9.
struct DiscretePowerLaw {
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    fn new(exponent: f64) -> Result<Self, HlmError> {
        if exponent.is_nan() || exponent <= 2.0 {
            return Err(HlmError::CalibrationFailed(format!(
                "power-law exponent must exceed 2, got {exponent}"
            )));
        }
        // Unnormalized masses and the zeta normalizer, summed until the
        // analytic tail bound is negligible.
        let mut masses = Vec::new();
        let mut sum = 0.0;
        let mut k = 1usize;
        loop {
            let m = (k as f64).powf(-exponent);
            masses.push(m);
            sum += m;
            // Tail above k is bounded by the integral k^(1-exponent)/(exponent-1).
            let tail = (k as f64).powf(1.0 - exponent) / (exponent - 1.0);
            if tail < 1e-9 * sum || k > 2_000_000 {
                break;
            }
            k += 1;
        }
        let total = sum + (k as f64).powf(1.0 - exponent) / (exponent - 1.0);
        let mut cdf = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in masses {
            acc += m;
            cdf.push(acc / total);
        }
        Ok(Self { cdf })
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        self.sample_at_most(self.cdf.len(), rng)
    }

    /// A draw conditioned on being at most `max_k`.
    fn sample_at_most(&self, max_k: usize, rng: &mut Rng) -> f64 {
        let limit = max_k.clamp(1, self.cdf.len());
        let cap = self.cdf[limit - 1];
        let u: f64 = rng.gen::<f64>() * cap;
        let idx = self.cdf.partition_point(|&c| c < u);
        (idx.min(limit - 1) + 1) as f64
    }
}

const EDGE_TOLERANCE: f64 = 0.02;
const MAX_DEGREE_TOLERANCE: f64 = 0.05;
const BISECTION_STEPS: usize = 45;

/// Scale `base` so the expected edge count hits the target; the entries
/// listed in `boosted` get the extra factor applied on top.
fn calibrate_scale(
    base: &[f64],
    boosted: &[usize],
    boost: f64,
    target_edges: f64,
) -> Result<WeightVector, HlmError> {
    let build = |scale: f64| -> Result<WeightVector, HlmError> {
        let mut w = base.iter().map(|&x| x * scale).collect::<Vec<f64>>();
        for &i in boosted {
            w[i] *= boost;
        }
        WeightVector::new(w)
    };
    // Bracket the target from above.
    let mut hi = 1.0f64;
    let mut steps = 0;
    while build(hi)?.expected_edges() < target_edges {
        hi *= 2.0;
        steps += 1;
        if steps > 60 {
            return Err(HlmError::CalibrationFailed(format!(
                "edge target {target_edges} not reachable by scaling"
            )));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if build(mid)?.expected_edges() < target_edges {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(0.5 * (lo + hi))
}

/// Outer bisection on the boost applied to the hub entries so the maximum
/// expected degree hits its target, with the overall scale recalibrated for
/// the edge target at every probe.
fn calibrate_two_targets(
    base: &[f64],
    boosted: &[usize],
    target_edges: f64,
    target_max_degree: f64,
) -> Result<WeightVector, HlmError> {
    let probe = |boost: f64| -> Result<f64, HlmError> {
        Ok(calibrate_scale(base, boosted, boost, target_edges)?.max_expected_degree())
    };
    let mut hi = 1.0f64;
    let mut steps = 0;
    while probe(hi)? < target_max_degree {
        hi *= 2.0;
        steps += 1;
        if steps > 60 {
            return Err(HlmError::CalibrationFailed(format!(
                "max-degree target {target_max_degree} not reachable by boosting"
            )));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? < target_max_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = calibrate_scale(base, boosted, 0.5 * (lo + hi), target_edges)?;

    let edges = w.expected_edges();
    let max_degree = w.max_expected_degree();
    if (edges - target_edges).abs() > EDGE_TOLERANCE * target_edges {
        return Err(HlmError::CalibrationFailed(format!(
            "expected edges {edges:.1} missed target {target_edges} by more than {:.0}%",
            EDGE_TOLERANCE * 100.0
        )));
    }
    if (max_degree - target_max_degree).abs() > MAX_DEGREE_TOLERANCE * target_max_degree {
        return Err(HlmError::CalibrationFailed(format!(
            "max expected degree {max_degree:.1} missed target {target_max_degree} by more than {:.0}%",
            MAX_DEGREE_TOLERANCE * 100.0
        )));
    }
    Ok(w)
}

/// A power-law weight family: n draws from the discrete power law with the
/// given exponent, calibrated so the expected edge count lands within 2% of
/// `target_edges` and the maximum expected degree within 5% of
/// `target_max_degree`. The calibration scales all weights for the edge
/// target and separately boosts the single largest draw for the degree
/// target. Deterministic given the seed.
pub fn make_power_law_weights(
    n: usize,
    exponent: f64,
    target_edges: f64,
    target_max_degree: f64,
    seed: u64,
) -> Result<WeightVector, HlmError> {
    if n == 0 {
        return Err(HlmError::CalibrationFailed("n must be at least 1".into()));
    }
    let law = DiscretePowerLaw::new(exponent)?;
    let mut rng = rng::stream(seed, WEIGHT_STREAM);
    let base: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
    if n == 1 {
        // A single vertex produces no edges; nothing to calibrate.
        return WeightVector::new(base);
    }
    let hub = (0..n).max_by(|&a, &b| base[a].total_cmp(&base[b])).unwrap();
    calibrate_two_targets(&base, &[hub], target_edges, target_max_degree)
}

/// A two-component mixture: a fraction (1 - bump_fraction) of "spoke"
/// vertices with power-law weights, and a fraction bump_fraction of "hub"
/// vertices with binomially distributed weights centered at `bump_mean`
/// (placed at the highest vertex ids). Spoke draws are conditioned to stay
/// at or below bump_mean / 2, keeping the degree ranges of the two
/// components separated so the maximum expected degree is controlled by the
/// hub group. Calibrated like [`make_power_law_weights`], with the boost
/// applied to all hubs. A zero bump fraction reduces to the pure power-law
/// family.
pub fn make_bump_power_law_weights(
    n: usize,
    exponent: f64,
    bump_mean: f64,
    bump_fraction: f64,
    target_edges: f64,
    target_max_degree: f64,
    seed: u64,
) -> Result<WeightVector, HlmError> {
    if !(0.0..=1.0).contains(&bump_fraction) {
        return Err(HlmError::CalibrationFailed(format!(
            "bump_fraction must lie in [0, 1], got {bump_fraction}"
        )));
    }
    let hubs = (bump_fraction * n as f64).round() as usize;
    if hubs == 0 {
        return make_power_law_weights(n, exponent, target_edges, target_max_degree, seed);
    }
    if bump_mean <= 0.0 {
        return Err(HlmError::CalibrationFailed(format!(
            "bump_mean must be positive, got {bump_mean}"
        )));
    }
    let law = DiscretePowerLaw::new(exponent)?;
    let binom = Binomial::new((2.0 * bump_mean).round() as u64, 0.5)
        .map_err(|e| HlmError::CalibrationFailed(format!("bump distribution: {e}")))?;
    let mut rng = rng::stream(seed, WEIGHT_STREAM);
    let spokes = n - hubs;
    let spoke_cap = ((bump_mean / 2.0) as usize).max(1);
    let mut base: Vec<f64> = (0..spokes)
        .map(|_| law.sample_at_most(spoke_cap, &mut rng))
        .collect();
    base.extend((0..hubs).map(|_| binom.sample(&mut rng) as f64));
    if n == 1 {
        return WeightVector::new(base);
    }
    let boosted: Vec<usize> = (spokes..n).collect();
    calibrate_two_targets(&base, &boosted, target_edges, target_max_degree)
}

/// Stream id reserved for weight sampling within a seed.
const WEIGHT_STREAM: u64 = u64::MAX;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_vector_basics() {
        let w = WeightVector::new(vec![3.0, 1.0, 0.0]).unwrap();
        assert_eq!(w.rho(), 4.0);
        assert_eq!(w.edge_probability(0, 1), 0.75);
        assert_eq!(w.edge_probability(0, 2), 0.0);
        assert_eq!(w.edge_probability(1, 1), 0.0);
        assert!(WeightVector::new(vec![-1.0]).is_err());
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn edge_probability_caps_at_one() {
        let w = WeightVector::new(vec![10.0, 10.0, 1.0]).unwrap();
        assert_eq!(w.edge_probability(0, 1), 1.0);
    }

    #[test]
    fn expected_degrees_match_direct_sum() {
        let w = WeightVector::new(vec![5.0, 3.0, 2.0, 1.0, 0.5, 0.0]).unwrap();
        let fast = w.expected_degrees();
        for (u, fast_u) in fast.iter().enumerate() {
            let direct: f64 = (0..w.len())
                .filter(|&v| v != u)
                .map(|v| w.edge_probability(u, v))
                .sum();
            assert!((fast_u - direct).abs() < 1e-12, "vertex {u}");
        }
        let direct_edges: f64 = (0..w.len())
            .flat_map(|u| ((u + 1)..w.len()).map(move |v| (u, v)))
            .map(|(u, v)| w.edge_probability(u, v))
            .sum();
        assert!((w.expected_edges() - direct_edges).abs() < 1e-12);
    }

    #[test]
    fn expected_degree_recovers_weight_without_capping() {
        // With no capped pair the expected degree is exactly w_u (1 - w_u / rho).
        let w = make_power_law_weights(200, 3.5, 190.0, 15.0, 9).unwrap();
        let rho = w.rho();
        let max_w = w.weights().iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(
            max_w * max_w <= rho,
            "no pair may be capped in this fixture"
        );
        for (u, d) in w.expected_degrees().iter().enumerate() {
            let wu = w.weights()[u];
            assert!((d - wu * (1.0 - wu / rho)).abs() < 1e-9);
        }
    }

    #[test]
    fn capping_shrinks_expected_degree() {
        let w = WeightVector::new(vec![20.0, 20.0, 1.0, 1.0]).unwrap();
        let d = w.expected_degrees();
        // Pair (0, 1) is capped, so vertex 0 falls short of w_0 (1 - w_0/rho).
        let wu = 20.0;
        assert!(d[0] < wu * (1.0 - wu / w.rho()));
    }

    #[test]
    fn power_law_family_hits_full_scale_targets() {
        let w = make_power_law_weights(5000, 3.5, 4742.0, 961.0, 1).unwrap();
        let edges = w.expected_edges();
        let maxd = w.max_expected_degree();
        assert!((edges - 4742.0).abs() <= 0.02 * 4742.0, "edges = {edges}");
        assert!((maxd - 961.0).abs() <= 0.05 * 961.0, "max degree = {maxd}");
        // Capping should touch only a small set of pairs: count pairs with
        // w_u w_v > rho.
        let mut sorted = w.weights().to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut capped = 0;
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                if sorted[i] * sorted[j] > w.rho() {
                    capped += 1;
                } else {
                    break;
                }
            }
            if sorted[i] * sorted[i] <= w.rho() {
                break;
            }
        }
        assert!(capped < 200, "capped pairs = {capped}");
    }

    #[test]
    fn bump_family_hits_full_scale_targets() {
        let w = make_bump_power_law_weights(5000, 3.5, 250.0, 0.004, 6067.0, 327.0, 1).unwrap();
        let edges = w.expected_edges();
        let maxd = w.max_expected_degree();
        assert!((edges - 6067.0).abs() <= 0.02 * 6067.0, "edges = {edges}");
        assert!((maxd - 327.0).abs() <= 0.05 * 327.0, "max degree = {maxd}");
    }

    #[test]
    fn bump_fraction_zero_reduces_to_power_law() {
        let a = make_bump_power_law_weights(300, 3.5, 50.0, 0.0, 280.0, 25.0, 4).unwrap();
        let b = make_power_law_weights(300, 3.5, 280.0, 25.0, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_vertex_family() {
        let w = make_power_law_weights(1, 3.5, 0.0, 0.0, 2).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.expected_edges(), 0.0);
    }

    #[test]
    fn family_is_deterministic_in_seed() {
        let a = make_power_law_weights(400, 3.5, 380.0, 40.0, 8).unwrap();
        let b = make_power_law_weights(400, 3.5, 380.0, 40.0, 8).unwrap();
        assert_eq!(a, b);
        let c = make_power_law_weights(400, 3.5, 380.0, 40.0, 9).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unreachable_targets_fail_loudly() {
        // Max expected degree can never exceed n - 1.
        let err = make_power_law_weights(10, 3.5, 5.0, 100.0, 3).unwrap_err();
        assert!(matches!(err, HlmError::CalibrationFailed(_)));
    }
}
