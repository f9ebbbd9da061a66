//! CSV and manifest writers.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::Axis;
use crate::subspace::window_length;

use super::metrics::{algorithm_label, match_estimate, method_label, MetricsSummary};
use super::scenario::Scenario;
use super::trial::{TaggedSpectrum, TrialRecord};

pub const METRICS_HEADER: [&str; 10] = [
    "scenario",
    "algorithm",
    "method",
    "snr_db",
    "target_idx",
    "truth",
    "bias",
    "rmse",
    "resolution_prob",
    "n_trials",
];

pub const TRIALS_HEADER: [&str; 10] = [
    "scenario",
    "trial",
    "seed",
    "algorithm",
    "method",
    "target_idx",
    "estimate",
    "truth",
    "resolved",
    "wall_ms",
];

fn snr_label(snr: Option<f64>) -> String {
    snr.map_or_else(|| "noiseless".to_string(), |s| s.to_string())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_metrics_csv(path: impl AsRef<Path>, summary: &MetricsSummary) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in &summary.rows {
        w.write_record([
            r.scenario.clone(),
            algorithm_label(r.algorithm, r.axis),
            method_label(r.method).to_string(),
            snr_label(r.snr_db),
            r.target_idx.to_string(),
            r.truth.to_string(),
            r.bias.to_string(),
            r.rmse.to_string(),
            r.resolution_prob.to_string(),
            r.n_trials.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per (trial, estimator, target). `estimate` holds the value matched
/// to that target and is empty when none was; `resolved` is the trial-level
/// flag under the scenario gate.
pub fn write_trials_csv(path: impl AsRef<Path>, records: &[TrialRecord], scenario: &Scenario) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRIALS_HEADER)?;
    for rec in records {
        for est in &rec.estimates {
            let truths = scenario.truths(est.axis);
            let m = match_estimate(est, &truths, scenario.gate(est.axis));
            for (i, truth) in truths.iter().enumerate() {
                w.write_record([
                    rec.scenario.clone(),
                    rec.trial.to_string(),
                    rec.seed.to_string(),
                    algorithm_label(est.algorithm, est.axis),
                    method_label(est.method).to_string(),
                    i.to_string(),
                    m.assigned[i].map_or_else(String::new, |v| v.to_string()),
                    truth.to_string(),
                    m.resolved.to_string(),
                    est.wall_ms.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// File name for a spectrum: `<algorithm>_<method>_<axis>.csv`, with the
/// method omitted for delay spectra.
pub fn spectrum_file_name(s: &TaggedSpectrum) -> String {
    match s.method {
        Some(m) => format!("{}_{}_{}.csv", s.algorithm, m, s.spectrum.kind),
        None => format!("{}_{}.csv", s.algorithm, s.spectrum.kind),
    }
}

pub fn write_spectra(dir: impl AsRef<Path>, spectra: &[TaggedSpectrum]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    ensure_dir(dir)?;
    let mut out = Vec::with_capacity(spectra.len());
    for s in spectra {
        let path = dir.join(spectrum_file_name(s));
        s.spectrum.write_csv(&path)?;
        out.push(path);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ManifestNumerology {
    mu: u32,
    n_rb: usize,
    n_subcarriers: usize,
    n_symbols: usize,
    delta_f_hz: f64,
    carrier_hz: f64,
    c0: f64,
    t_c_s: f64,
    frame_samples: u64,
}

#[derive(Debug, Serialize)]
struct ManifestTarget {
    distance_m: f64,
    delay_s: f64,
    velocity_mps: f64,
    doppler_hz: f64,
    alpha_mag: f64,
    alpha_phase_rad: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: Vec<String>,
    created_unix_s: u64,
    scenario: String,
    scenario_file: Option<String>,
    scenario_text: Option<String>,
    base_seed: u64,
    n_trials: usize,
    trial_seeds: Vec<u64>,
    snr_db: Vec<Option<f64>>,
    numerology: ManifestNumerology,
    targets: Vec<ManifestTarget>,
    algorithms: Vec<String>,
    methods: Vec<String>,
    axes: Vec<String>,
    synthesis: String,
    random_phase: bool,
    rho: f64,
    smoothing_window: Option<usize>,
    smoothing_blocks: Option<usize>,
    forward_backward: bool,
    doppler_gate: f64,
    delay_gate: f64,
    files: Vec<String>,
}

impl Manifest {
    pub fn new(
        scenario: &Scenario,
        scenario_file: Option<&Path>,
        command: Vec<String>,
        trial_seeds: Vec<u64>,
        files: Vec<String>,
    ) -> Self {
        let num = &scenario.numerology;
        let window = window_length(num.n_sc(), scenario.rho).ok();
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            tool: "nrsense",
            version: env!("CARGO_PKG_VERSION"),
            command,
            created_unix_s: created,
            scenario: scenario.name.clone(),
            scenario_file: scenario_file.map(|p| p.display().to_string()),
            scenario_text: scenario_file.and_then(|p| fs::read_to_string(p).ok()),
            base_seed: scenario.seed,
            n_trials: scenario.n_trials,
            trial_seeds,
            snr_db: scenario.snr_db.clone(),
            numerology: ManifestNumerology {
                mu: num.mu(),
                n_rb: num.n_rb(),
                n_subcarriers: num.n_sc(),
                n_symbols: num.n_symb(),
                delta_f_hz: num.delta_f(),
                carrier_hz: num.carrier_hz(),
                c0: num.c0(),
                t_c_s: num.t_c(),
                frame_samples: num.frame_samples(),
            },
            targets: scenario
                .targets
                .iter()
                .map(|t| ManifestTarget {
                    distance_m: t.distance_m,
                    delay_s: t.target.delay_s,
                    velocity_mps: t.velocity_mps,
                    doppler_hz: t.target.doppler_hz,
                    alpha_mag: t.target.alpha.norm(),
                    alpha_phase_rad: t.target.alpha.arg(),
                })
                .collect(),
            algorithms: scenario.algorithms.iter().map(|a| a.to_string()).collect(),
            methods: scenario.methods.iter().map(|m| m.to_string()).collect(),
            axes: scenario.axes.iter().map(|a| a.to_string()).collect(),
            synthesis: format!("{:?}", scenario.synthesis).to_ascii_lowercase(),
            random_phase: scenario.random_phase,
            rho: scenario.rho,
            smoothing_window: window.map(|w| w.0),
            smoothing_blocks: window.map(|w| w.1),
            forward_backward: scenario.forward_backward,
            doppler_gate: scenario.gate(Axis::Doppler),
            delay_gate: scenario.gate(Axis::Delay),
            files,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidParameter(format!("manifest serialization: {e}")))?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Write `metrics.csv`, `trials.csv` and `manifest.json` into `dir`.
pub fn write_outputs(
    dir: impl AsRef<Path>,
    summary: &MetricsSummary,
    records: &[TrialRecord],
    scenario: &Scenario,
    manifest: impl FnOnce(Vec<String>) -> Manifest,
) -> Result<()> {
    let dir = dir.as_ref();
    ensure_dir(dir)?;
    write_metrics_csv(dir.join("metrics.csv"), summary)?;
    write_trials_csv(dir.join("trials.csv"), records, scenario)?;
    let files = vec!["metrics.csv".to_string(), "trials.csv".to_string(), "manifest.json".to_string()];
    manifest(files).write(dir.join("manifest.json"))
}
