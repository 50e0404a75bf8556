//! The before/after change-point experiment around marked events, and
//! all-pairs RH heatmaps over a window range.

use super::{GraphSequence, IngestError, RedTeamMarks};
use crate::graph::Ccdh;
use crate::similarity::{ks_two_sample, pairwise_rh_matrix, rh_smooth, KsTestResult};

/// For every mark r whose preceding half-window (r - ell/2, r) is free of
/// other marks, collects RH values between window pairs lagged by `delta`
/// wholly inside the before period (r - ell/2, r) and the after period
/// (r, r + ell/2), aggregates them over all eligible marks, and returns the
/// two-sample KS test between the two aggregates.
///
/// `delta` must be a positive multiple of the sequence step, and ell/2 must
/// exceed delta. The after period may contain further marks.
pub fn before_after_experiment(
    seq: &GraphSequence,
    marks: &RedTeamMarks,
    ell: u64,
    delta: u64,
) -> Result<KsTestResult, IngestError> {
    before_after_experiment_cached(seq, &seq.ccdhs(), marks, ell, delta)
}

/// As [`before_after_experiment`], with the per-window ccdhs precomputed by
/// the caller so a parameter grid does not recompute them per cell.
pub fn before_after_experiment_cached(
    seq: &GraphSequence,
    ccdhs: &[Ccdh],
    marks: &RedTeamMarks,
    ell: u64,
    delta: u64,
) -> Result<KsTestResult, IngestError> {
    if delta == 0 || !delta.is_multiple_of(seq.step) {
        return Err(IngestError::BadLag(delta, seq.step));
    }
    let half = ell / 2;
    if half <= delta {
        return Err(IngestError::WindowTooShortForLag(ell, delta));
    }
    assert_eq!(ccdhs.len(), seq.len());

    let first = match seq.windows.first() {
        Some(w) => w.start as i64,
        None => {
            return Err(IngestError::InsufficientData(
                "the sequence has no windows".into(),
            ))
        }
    };
    let step = seq.step as i64;
    let lag = (delta / seq.step) as usize;

    // Window indices whose start lies strictly inside (lo, hi).
    let indices_in_open = |lo: i64, hi: i64| -> std::ops::Range<usize> {
        let i_min = ((lo - first).div_euclid(step) + 1).max(0);
        let i_max = ((hi - 1 - first).div_euclid(step)).min(seq.len() as i64 - 1);
        if i_min > i_max {
            return 0..0;
        }
        i_min as usize..(i_max as usize + 1)
    };

    let mut before = Vec::new();
    let mut after = Vec::new();
    for &r in marks.timestamps() {
        let r = r as i64;
        let half = half as i64;
        if marks.any_in_open((r - half).max(0) as u64, r as u64) {
            continue;
        }
        let delta = delta as i64;
        for i in indices_in_open(r - half, r - delta) {
            if i + lag < seq.len() {
                before.push(rh_smooth(&ccdhs[i], &ccdhs[i + lag]).value);
            }
        }
        for i in indices_in_open(r, r + half - delta) {
            if i + lag < seq.len() {
                after.push(rh_smooth(&ccdhs[i], &ccdhs[i + lag]).value);
            }
        }
    }

    if before.is_empty() || after.is_empty() {
        return Err(IngestError::InsufficientData(format!(
            "before/after aggregates have {}/{} samples",
            before.len(),
            after.len()
        )));
    }
    ks_two_sample(&before, &after).map_err(|e| IngestError::InsufficientData(e.to_string()))
}

/// All-pairs RH distances over a window index range, with the Gaussian
/// similarity transform exp(-d^2 / (2 sigma^2)) at sigma = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub starts: Vec<u64>,
    pub rh: Vec<Vec<f64>>,
    pub similarity: Vec<Vec<f64>>,
}

pub fn pairwise_heatmap(
    seq: &GraphSequence,
    range: std::ops::Range<usize>,
) -> Result<Heatmap, IngestError> {
    if range.is_empty() {
        return Err(IngestError::EmptyRange);
    }
    if range.end > seq.len() {
        return Err(IngestError::InsufficientData(format!(
            "window range {}..{} exceeds the {} available windows",
            range.start,
            range.end,
            seq.len()
        )));
    }
    let starts: Vec<u64> = seq.windows[range.clone()].iter().map(|w| w.start).collect();
    let ccdhs: Vec<Ccdh> = seq.windows[range]
        .iter()
        .map(|w| crate::graph::ccdh_of(&w.graph))
        .collect();
    let rh = pairwise_rh_matrix(&ccdhs);
    let similarity = rh
        .iter()
        .map(|row| row.iter().map(|&d| (-d * d / 2.0).exp()).collect())
        .collect();
    Ok(Heatmap {
        starts,
        rh,
        similarity,
    })
}
