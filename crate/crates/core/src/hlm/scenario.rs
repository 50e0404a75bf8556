//! Scenario simulation: paired (G, G') draws under one evolution step, with
//! and without a planted anomaly, recording three similarity measures per
//! pair. Trials run on independent generator streams, so results are
//! deterministic for a given seed regardless of thread count.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    chung_lu_sample, hlm_step, inject_lateral, inject_scan, make_bump_power_law_weights,
    make_power_law_weights, HlmError, HlmParams, WeightVector,
};
use crate::graph::{ccdh_of, Graph};
use crate::rng;
use crate::similarity::{edit_distance_aligned, ks_test_graphs, rh_smooth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    PowerLaw,
    BumpPowerLaw,
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::PowerLaw => "power_law",
            WeightFamily::BumpPowerLaw => "bump_power_law",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    Scan,
    LateralMovement,
}

impl AnomalyKind {
    pub fn name(&self) -> &'static str {
        match self {
            AnomalyKind::Scan => "scan",
            AnomalyKind::LateralMovement => "lateral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnomalySpec {
    pub kind: AnomalyKind,
    pub edge_budget: usize,
}

/// Full description of one simulated scenario. `anomaly: None` runs the
/// anomalous trials as plain transitions (the null configuration).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub weight_family: WeightFamily,
    pub exponent: f64,
    pub bump_mean: f64,
    pub bump_fraction: f64,
    pub target_edges: f64,
    pub target_max_degree: f64,
    pub anomaly: Option<AnomalySpec>,
    pub alpha: f64,
    pub trials: usize,
    pub baseline_transitions: usize,
    pub seed: u64,
}

/// Reference aggregates of the two degree-weight families at n = 5000, used
/// to scale default targets to other sizes.
const POWER_LAW_EDGES_AT_5000: f64 = 4742.0;
const POWER_LAW_MAX_DEGREE_AT_5000: f64 = 961.0;
const BUMP_EDGES_AT_5000: f64 = 6067.0;
const BUMP_MAX_DEGREE_AT_5000: f64 = 327.0;
const BUMP_MEAN_AT_5000: f64 = 250.0;
const DEFAULT_BUMP_FRACTION: f64 = 0.004;

impl ScenarioConfig {
    /// A config with family defaults scaled linearly from the published
    /// n = 5000 aggregates.
    pub fn defaults_for(family: WeightFamily, n: usize) -> Self {
        let scale = n as f64 / 5000.0;
        let (target_edges, target_max_degree) = match family {
            WeightFamily::PowerLaw => (
                POWER_LAW_EDGES_AT_5000 * scale,
                POWER_LAW_MAX_DEGREE_AT_5000 * scale,
            ),
            WeightFamily::BumpPowerLaw => {
                (BUMP_EDGES_AT_5000 * scale, BUMP_MAX_DEGREE_AT_5000 * scale)
            }
        };
        Self {
            n,
            weight_family: family,
            exponent: 3.5,
            bump_mean: BUMP_MEAN_AT_5000 * scale,
            bump_fraction: DEFAULT_BUMP_FRACTION,
            target_edges,
            target_max_degree,
            anomaly: None,
            alpha: 0.15,
            trials: 0,
            baseline_transitions: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), HlmError> {
        if self.n == 0 {
            return Err(HlmError::Config("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(HlmError::InvalidAlpha(self.alpha));
        }
        if let Some(a) = &self.anomaly {
            if a.edge_budget == 0 {
                return Err(HlmError::Config("edge_budget must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Parses the declarative key-value config format: one `key = value` per
    /// line, `#` comments, unknown keys rejected, missing required fields
    /// reported by name.
    pub fn from_key_value_text(text: &str) -> Result<Self, HlmError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HlmError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        let get = |key: &str| {
            pairs
                .iter()
                .rev()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };
        let require =
            |key: &str| get(key).ok_or_else(|| HlmError::Config(format!("missing field: {key}")));
        let parse_f64 = |key: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|_| HlmError::Config(format!("field {key}: expected a number, got {v:?}")))
        };
        let parse_usize = |key: &str, v: &str| {
            v.parse::<usize>().map_err(|_| {
                HlmError::Config(format!("field {key}: expected an integer, got {v:?}"))
            })
        };

        for (k, _) in &pairs {
            const KNOWN: &[&str] = &[
                "weight_family",
                "n",
                "exponent",
                "bump_mean",
                "bump_fraction",
                "target_edges",
                "target_max_degree",
                "anomaly",
                "edge_budget",
                "alpha",
                "trials",
                "baseline_transitions",
                "seed",
            ];
            if !KNOWN.contains(&k.as_str()) {
                return Err(HlmError::Config(format!("unknown field: {k}")));
            }
        }

        let family = match require("weight_family")? {
            "power_law" => WeightFamily::PowerLaw,
            "bump_power_law" => WeightFamily::BumpPowerLaw,
            other => {
                return Err(HlmError::Config(format!(
                    "field weight_family: expected power_law or bump_power_law, got {other:?}"
                )))
            }
        };
        let n = parse_usize("n", require("n")?)?;
        let mut cfg = Self::defaults_for(family, n);
        if let Some(v) = get("exponent") {
            cfg.exponent = parse_f64("exponent", v)?;
        }
        if let Some(v) = get("bump_mean") {
            cfg.bump_mean = parse_f64("bump_mean", v)?;
        }
        if let Some(v) = get("bump_fraction") {
            cfg.bump_fraction = parse_f64("bump_fraction", v)?;
        }
        if let Some(v) = get("target_edges") {
            cfg.target_edges = parse_f64("target_edges", v)?;
        }
        if let Some(v) = get("target_max_degree") {
            cfg.target_max_degree = parse_f64("target_max_degree", v)?;
        }
        cfg.alpha = parse_f64("alpha", require("alpha")?)?;
        cfg.trials = parse_usize("trials", require("trials")?)?;
        cfg.baseline_transitions =
            parse_usize("baseline_transitions", require("baseline_transitions")?)?;
        cfg.seed = require("seed")?.parse::<u64>().map_err(|_| {
            HlmError::Config("field seed: expected a 64-bit unsigned integer".into())
        })?;
        cfg.anomaly = match get("anomaly").unwrap_or("none") {
            "none" => None,
            kind => {
                let kind = match kind {
                    "scan" => AnomalyKind::Scan,
                    "lateral" => AnomalyKind::LateralMovement,
                    other => {
                        return Err(HlmError::Config(format!(
                            "field anomaly: expected scan, lateral, or none, got {other:?}"
                        )))
                    }
                };
                let budget = parse_usize("edge_budget", require("edge_budget")?)?;
                Some(AnomalySpec {
                    kind,
                    edge_budget: budget,
                })
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the calibrated weight vector for this config.
    pub fn build_weights(&self) -> Result<WeightVector, HlmError> {
        match self.weight_family {
            WeightFamily::PowerLaw => make_power_law_weights(
                self.n,
                self.exponent,
                self.target_edges,
                self.target_max_degree,
                self.seed,
            ),
            WeightFamily::BumpPowerLaw => make_bump_power_law_weights(
                self.n,
                self.exponent,
                self.bump_mean,
                self.bump_fraction,
                self.target_edges,
                self.target_max_degree,
                self.seed,
            ),
        }
    }
}

/// The default evolution-rate sweep: 21 evenly spaced values from 0.05 to
/// 0.25 (step 0.01), covering the best-case rates 0.23 and 0.24.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..21).map(|i| 0.05 + 0.01 * i as f64).collect()
}

/// Per-trial values of the three measures, in trial order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasureSamples {
    pub rh: Vec<f64>,
    pub ks_p: Vec<f64>,
    pub edit: Vec<f64>,
}

impl MeasureSamples {
    fn from_rows(rows: Vec<(f64, f64, f64)>) -> Self {
        let mut out = Self::default();
        for (rh, ks, edit) in rows {
            out.rh.push(rh);
            out.ks_p.push(ks);
            out.edit.push(edit);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rh.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub baseline: MeasureSamples,
    pub anomalous: MeasureSamples,
}

fn measure_pair(g: &Graph, g2: &Graph) -> Result<(f64, f64, f64), HlmError> {
    let rh = rh_smooth(&ccdh_of(g), &ccdh_of(g2)).value;
    let ks = ks_test_graphs(g, g2)
        .map_err(|e| HlmError::Config(format!("measure failed: {e}")))?
        .p_value;
    let edit = edit_distance_aligned(g, g2)
        .map_err(|e| HlmError::Config(format!("measure failed: {e}")))?;
    Ok((rh, ks, edit as f64))
}

/// Runs one scenario: `baseline_transitions` plain evolution pairs and
/// `trials` anomalous pairs (one evolution step, then the anomaly), each
/// scored by smooth RH distance, the KS p-value between degree
/// distributions, and aligned edit distance.
///
/// Baseline trial i draws from stream 2i of the seed, anomalous trial j
/// from stream 2j + 1, so the two series are independent and the whole run
/// is reproducible.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HlmError> {
    cfg.validate()?;
    let weights = cfg.build_weights()?;
    let params = HlmParams::new(cfg.alpha)?;

    let baseline_rows: Result<Vec<_>, HlmError> = (0..cfg.baseline_transitions)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(cfg.seed, 2 * i as u64);
            let g = chung_lu_sample(&weights, &mut rng);
            let g2 = hlm_step(&g, &params, &weights, &mut rng)?;
            measure_pair(&g, &g2)
        })
        .collect();
    let anomalous_rows: Result<Vec<_>, HlmError> = (0..cfg.trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng::stream(cfg.seed, 2 * j as u64 + 1);
            let g = chung_lu_sample(&weights, &mut rng);
            let mut g2 = hlm_step(&g, &params, &weights, &mut rng)?;
            if let Some(spec) = &cfg.anomaly {
                g2 = match spec.kind {
                    AnomalyKind::Scan => inject_scan(&g2, spec.edge_budget, &mut rng)?,
                    AnomalyKind::LateralMovement => {
                        inject_lateral(&g2, spec.edge_budget, &mut rng)?
                    }
                };
            }
            measure_pair(&g, &g2)
        })
        .collect();

    Ok(ScenarioOutput {
        baseline: MeasureSamples::from_rows(baseline_rows?),
        anomalous: MeasureSamples::from_rows(anomalous_rows?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::defaults_for(WeightFamily::PowerLaw, 300);
        cfg.anomaly = Some(AnomalySpec {
            kind: AnomalyKind::Scan,
            edge_budget: 10,
        });
        cfg.alpha = 0.2;
        cfg.trials = 20;
        cfg.baseline_transitions = 30;
        cfg.seed = 77;
        cfg
    }

    #[test]
    fn zero_trials_leave_anomalous_empty() {
        let mut cfg = tiny_config();
        cfg.trials = 0;
        let out = run_scenario(&cfg).unwrap();
        assert!(out.anomalous.is_empty());
        assert_eq!(out.baseline.len(), 30);
    }

    #[test]
    fn alpha_zero_scan_gives_exact_edit_budget() {
        let mut cfg = tiny_config();
        cfg.alpha = 0.0;
        let out = run_scenario(&cfg).unwrap();
        assert!(out.anomalous.edit.iter().all(|&e| e == 10.0));
        assert!(out.baseline.edit.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn desk_scale_scenario_smoke() {
        let mut cfg = ScenarioConfig::defaults_for(WeightFamily::BumpPowerLaw, 500);
        cfg.anomaly = Some(AnomalySpec {
            kind: AnomalyKind::LateralMovement,
            edge_budget: 15,
        });
        cfg.alpha = 0.23;
        cfg.trials = 25;
        cfg.baseline_transitions = 25;
        cfg.seed = 5;
        let out = run_scenario(&cfg).unwrap();
        for series in [&out.baseline, &out.anomalous] {
            assert_eq!(series.len(), 25);
            assert!(series.rh.iter().all(|v| v.is_finite() && *v >= 0.0));
            assert!(series.ks_p.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(series.edit.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn scenario_is_deterministic() {
        let cfg = tiny_config();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_grid_covers_best_cases() {
        let grid = default_alpha_grid();
        assert_eq!(grid.len(), 21);
        assert!((grid[0] - 0.05).abs() < 1e-12);
        assert!((grid[20] - 0.25).abs() < 1e-12);
        assert!(grid.iter().any(|a| (a - 0.23).abs() < 1e-12));
        assert!(grid.iter().any(|a| (a - 0.24).abs() < 1e-12));
    }

    #[test]
    fn config_text_round_trip_and_errors() {
        let text = "\
# scenario description
weight_family = power_law
n = 300
alpha = 0.2
trials = 20
baseline_transitions = 30
seed = 77
anomaly = scan
edge_budget = 10
";
        let cfg = ScenarioConfig::from_key_value_text(text).unwrap();
        assert_eq!(cfg, tiny_config());

        let missing =
            "weight_family = power_law\nn = 100\ntrials = 1\nbaseline_transitions = 1\nseed = 0\n";
        let err = ScenarioConfig::from_key_value_text(missing).unwrap_err();
        assert_eq!(err.to_string(), "scenario config: missing field: alpha");

        let unknown = format!("{text}\nbogus_key = 3\n");
        assert!(ScenarioConfig::from_key_value_text(&unknown)
            .unwrap_err()
            .to_string()
            .contains("unknown field: bogus_key"));

        let bad_anomaly = text.replace("anomaly = scan", "anomaly = probe");
        assert!(ScenarioConfig::from_key_value_text(&bad_anomaly).is_err());
    }
}
