//! `rhgraph simulate`: run one scenario from a config file and write the
//! measure distributions, anomaly scores, ROC curves, and a JSON summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rhgraph::hlm::{run_scenario, MeasureSamples, ScenarioConfig};
use rhgraph::scoring::{
    anomaly_scores, mean_and_std, roc_curve, roc_curve_calibrated, EmpiricalDistribution, RocCurve,
};
use rhgraph::similarity::ks_two_sample;

use crate::manifest::ManifestBuilder;
use crate::{resolve_out_dir, write_file, CliError};

const MEASURES: [&str; 3] = ["rh", "ks_pvalue", "edit"];

#[derive(Debug, Serialize)]
pub struct MeasureSummary {
    pub baseline_mean: f64,
    pub baseline_std: f64,
    pub anomalous_mean: f64,
    pub anomalous_std: f64,
    /// Two-sample KS between the baseline and anomalous value distributions.
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    /// Area under the ROC-like curve (empirical and analytic false-positive
    /// axes).
    pub roc_area: f64,
    pub roc_area_calibrated: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub rh: Option<MeasureSummary>,
    pub ks_pvalue: Option<MeasureSummary>,
    pub edit: Option<MeasureSummary>,
    /// Fraction of anomalous trials where the RH anomaly score strictly
    /// exceeds the other measure's score.
    pub rh_score_beats_ks: Option<f64>,
    pub rh_score_beats_edit: Option<f64>,
}

fn measure_csv(samples: &MeasureSamples) -> String {
    let mut out = String::from("trial,rh,ks_pvalue,edit\n");
    for i in 0..samples.len() {
        let _ = writeln!(
            out,
            "{i},{},{},{}",
            samples.rh[i], samples.ks_p[i], samples.edit[i]
        );
    }
    out
}

fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,x,y\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.x, p.y);
    }
    out
}

struct MeasureAnalysis {
    summary: MeasureSummary,
    baseline_scores: Vec<f64>,
    anomalous_scores: Vec<f64>,
    roc: RocCurve,
}

fn analyze_measure(baseline: &[f64], anomalous: &[f64]) -> Result<MeasureAnalysis, CliError> {
    let dist = EmpiricalDistribution::new(baseline.to_vec())?;
    let baseline_scores = anomaly_scores(&dist, baseline)?;
    let anomalous_scores = anomaly_scores(&dist, anomalous)?;
    let roc = roc_curve(&baseline_scores, &anomalous_scores)?;
    let ks = ks_two_sample(baseline, anomalous)?;
    let (baseline_mean, baseline_std) = mean_and_std(baseline);
    let (anomalous_mean, anomalous_std) = mean_and_std(anomalous);
    let summary = MeasureSummary {
        baseline_mean,
        baseline_std,
        anomalous_mean,
        anomalous_std,
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
        roc_area: roc.area(),
        roc_area_calibrated: roc_curve_calibrated(&anomalous_scores)?.area(),
    };
    Ok(MeasureAnalysis {
        summary,
        baseline_scores,
        anomalous_scores,
        roc,
    })
}

/// Runs the scenario described by `config_path` (seed optionally overridden)
/// and writes baseline.csv, anomalous.csv, scores.csv, one ROC CSV per
/// measure, summary.json, and manifest.json into the output directory.
pub fn cmd_simulate(
    config_path: &Path,
    seed_override: Option<u64>,
    out: Option<PathBuf>,
) -> Result<SimulateSummary, CliError> {
    let mut manifest = ManifestBuilder::new("simulate");
    manifest.config(config_path).input(config_path);

    let text = std::fs::read_to_string(config_path)?;
    let mut cfg = ScenarioConfig::from_key_value_text(&text)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    manifest.seed(cfg.seed);

    let out_dir = resolve_out_dir(out);
    std::fs::create_dir_all(&out_dir)?;

    let output = run_scenario(&cfg)?;

    let mut paths = vec![
        (out_dir.join("baseline.csv"), measure_csv(&output.baseline)),
        (
            out_dir.join("anomalous.csv"),
            measure_csv(&output.anomalous),
        ),
    ];

    let scored = !output.baseline.is_empty() && !output.anomalous.is_empty();
    let mut summary = SimulateSummary {
        config: cfg.clone(),
        seed: cfg.seed,
        rh: None,
        ks_pvalue: None,
        edit: None,
        rh_score_beats_ks: None,
        rh_score_beats_edit: None,
    };

    if scored {
        let series = [
            (&output.baseline.rh, &output.anomalous.rh),
            (&output.baseline.ks_p, &output.anomalous.ks_p),
            (&output.baseline.edit, &output.anomalous.edit),
        ];
        let mut analyses = Vec::new();
        for (baseline, anomalous) in series {
            analyses.push(analyze_measure(baseline, anomalous)?);
        }

        let mut scores = String::from("trial,rh_score,ks_score,edit_score\n");
        let trials = output.anomalous.len();
        let mut rh_beats_ks = 0usize;
        let mut rh_beats_edit = 0usize;
        for i in 0..trials {
            let rh = analyses[0].anomalous_scores[i];
            let ks = analyses[1].anomalous_scores[i];
            let edit = analyses[2].anomalous_scores[i];
            if rh > ks {
                rh_beats_ks += 1;
            }
            if rh > edit {
                rh_beats_edit += 1;
            }
            let _ = writeln!(scores, "{i},{rh},{ks},{edit}");
        }
        paths.push((out_dir.join("scores.csv"), scores));

        let mut baseline_scores = String::from("trial,rh_score,ks_score,edit_score\n");
        for i in 0..output.baseline.len() {
            let _ = writeln!(
                baseline_scores,
                "{i},{},{},{}",
                analyses[0].baseline_scores[i],
                analyses[1].baseline_scores[i],
                analyses[2].baseline_scores[i]
            );
        }
        paths.push((out_dir.join("baseline_scores.csv"), baseline_scores));

        for (name, analysis) in MEASURES.iter().zip(&analyses) {
            paths.push((
                out_dir.join(format!("roc_{name}.csv")),
                roc_csv(&analysis.roc),
            ));
        }

        summary.rh_score_beats_ks = Some(rh_beats_ks as f64 / trials as f64);
        summary.rh_score_beats_edit = Some(rh_beats_edit as f64 / trials as f64);
        let mut it = analyses.into_iter();
        summary.rh = Some(it.next().unwrap().summary);
        summary.ks_pvalue = Some(it.next().unwrap().summary);
        summary.edit = Some(it.next().unwrap().summary);
    }

    paths.push((
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    ));

    for (path, contents) in &paths {
        write_file(path, contents)?;
        manifest.output(path);
    }
    manifest.write(&out_dir)?;
    Ok(summary)
}
