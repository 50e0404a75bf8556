//! Temporal profile scoring across sources and lags: observed RH values at
//! one timestamp, periodic baselines estimated from same-time-of-week window
//! pairs, and the geometric-mean temporal score.

use serde::Serialize;

use super::{EmpiricalDistribution, ScoringError};
use crate::graph::ccdh_of;
use crate::ingest::{GraphSequence, RedTeamMarks};
use crate::similarity::rh_smooth;

/// One (source, lag) entry of a profile: the observed RH value and the
/// baseline distribution it is judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalProfileEntry {
    pub source: usize,
    pub lag: u64,
    pub observed: f64,
    pub baseline: EmpiricalDistribution,
}

impl TemporalProfileEntry {
    /// Half-width for the interior probability: one twentieth of the
    /// baseline range. None when the baseline is degenerate.
    pub fn epsilon(&self) -> Option<f64> {
        let range = self.baseline.range()?;
        (range > 0.0).then_some(range / 20.0)
    }
}

/// The profile vector at one timestamp, over every (source, lag) pair for
/// which both window graphs exist. Pairs with missing graphs are simply
/// absent.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalProfile {
    pub time: u64,
    pub entries: Vec<TemporalProfileEntry>,
}

/// Parameters of the periodic baseline: candidate times sit within `slack`
/// of the target time modulo `period`, excluding times within
/// `near_exclusion` of the target itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub period: u64,
    pub slack: u64,
    pub near_exclusion: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            period: 7 * 24 * 3600,
            slack: 600,
            near_exclusion: 600,
        }
    }
}

/// Minimum baseline size for an entry to count toward the temporal score.
pub const DEFAULT_MIN_BASELINE: usize = 5;

/// Observed RH values at time `t` for every source and lag with both
/// windows present; baselines are left empty.
pub fn temporal_profile(seqs: &[GraphSequence], t: u64, lags: &[u64]) -> TemporalProfile {
    let mut entries = Vec::new();
    for (source, seq) in seqs.iter().enumerate() {
        for &lag in lags {
            let Some(now) = seq.index_of(t) else { continue };
            let Some(earlier) = t.checked_sub(lag).and_then(|te| seq.index_of(te)) else {
                continue;
            };
            let observed = rh_smooth(
                &ccdh_of(&seq.windows[now].graph),
                &ccdh_of(&seq.windows[earlier].graph),
            )
            .value;
            entries.push(TemporalProfileEntry {
                source,
                lag,
                observed,
                baseline: EmpiricalDistribution::default(),
            });
        }
    }
    TemporalProfile { time: t, entries }
}

/// The baseline distribution for (t, source sequence, lag): RH values of
/// window pairs (t*, t* - lag) over every t* congruent to t modulo the
/// period within the slack, excluding t* near t and t* with a marked event
/// in [t* - lag, t*]. May be empty; the caller decides sufficiency.
pub fn baseline_distribution(
    seq: &GraphSequence,
    t: u64,
    lag: u64,
    params: &BaselineParams,
    exclusions: &RedTeamMarks,
) -> EmpiricalDistribution {
    let mut values = Vec::new();
    let Some(lag_steps) = (lag > 0)
        .then(|| lag / seq.step)
        .filter(|_| lag.is_multiple_of(seq.step))
    else {
        return EmpiricalDistribution::default();
    };
    let mut ccdh_cache: Vec<Option<crate::graph::Ccdh>> = vec![None; seq.len()];
    let mut ccdh_at = |i: usize, seq: &GraphSequence| {
        if ccdh_cache[i].is_none() {
            ccdh_cache[i] = Some(ccdh_of(&seq.windows[i].graph));
        }
        ccdh_cache[i].clone().unwrap()
    };

    for (i, w) in seq.windows.iter().enumerate() {
        if i < lag_steps as usize {
            continue;
        }
        let ts = w.start;
        let near = ts.abs_diff(t);
        if near <= params.near_exclusion {
            continue;
        }
        let offset = ts.abs_diff(t) % params.period;
        let circular = offset.min(params.period - offset);
        if circular > params.slack {
            continue;
        }
        if exclusions.any_in_closed(ts.saturating_sub(lag), ts) {
            continue;
        }
        let a = ccdh_at(i, seq);
        let b = ccdh_at(i - lag_steps as usize, seq);
        values.push(rh_smooth(&a, &b).value);
    }
    EmpiricalDistribution::new(values).expect("RH values are finite")
}

/// Builds the profile at `t` with baselines attached per entry.
pub fn temporal_profile_with_baselines(
    seqs: &[GraphSequence],
    t: u64,
    lags: &[u64],
    params: &BaselineParams,
    exclusions: &RedTeamMarks,
) -> TemporalProfile {
    let mut profile = temporal_profile(seqs, t, lags);
    for entry in &mut profile.entries {
        entry.baseline =
            baseline_distribution(&seqs[entry.source], t, entry.lag, params, exclusions);
    }
    profile
}

fn entry_v_hat(entry: &TemporalProfileEntry, min_baseline: usize) -> Option<f64> {
    if entry.baseline.len() < min_baseline {
        return None;
    }
    let epsilon = entry.epsilon()?;
    Some(
        entry
            .baseline
            .interior_fraction(entry.observed - epsilon, entry.observed + epsilon),
    )
}

fn geometric_mean(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    if values.contains(&0.0) {
        return 0.0;
    }
    let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    log_mean.exp()
}

/// The temporal score at the profile's timestamp: per entry, the empirical
/// probability that the baseline falls within epsilon of the observed value,
/// combined by geometric mean. Entries with fewer than `min_baseline`
/// samples (or a degenerate baseline) are dropped; when everything drops the
/// time is unscorable. Low scores are anomalous.
pub fn temporal_score(profile: &TemporalProfile, min_baseline: usize) -> Result<f64, ScoringError> {
    let v_hats: Vec<f64> = profile
        .entries
        .iter()
        .filter_map(|e| entry_v_hat(e, min_baseline))
        .collect();
    if v_hats.is_empty() {
        return Err(ScoringError::Unscorable);
    }
    Ok(geometric_mean(&v_hats))
}

/// Per-entry detail of one temporal-score evaluation, for the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct TemporalEntryReport {
    pub source: usize,
    pub lag: u64,
    pub observed: f64,
    pub baseline_size: usize,
    pub epsilon: Option<f64>,
    pub v_hat: Option<f64>,
    pub dropped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TemporalScoreReport {
    pub time: u64,
    pub min_baseline: usize,
    pub entries: Vec<TemporalEntryReport>,
    pub score: Option<f64>,
}

/// The temporal score plus the per-entry evidence behind it.
pub fn temporal_score_report(
    profile: &TemporalProfile,
    min_baseline: usize,
) -> TemporalScoreReport {
    let entries: Vec<TemporalEntryReport> = profile
        .entries
        .iter()
        .map(|e| {
            let v_hat = entry_v_hat(e, min_baseline);
            TemporalEntryReport {
                source: e.source,
                lag: e.lag,
                observed: e.observed,
                baseline_size: e.baseline.len(),
                epsilon: e.epsilon(),
                v_hat,
                dropped: v_hat.is_none(),
            }
        })
        .collect();
    let score = temporal_score(profile, min_baseline).ok();
    TemporalScoreReport {
        time: profile.time,
        min_baseline,
        entries,
        score,
    }
}
