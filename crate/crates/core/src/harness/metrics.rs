//! Matching estimates to ground truth and aggregating bias, RMSE and
//! resolution probability.

use crate::error::{Error, Result};
use crate::numerology::CpMethod;
use crate::spectrum::Axis;

use super::scenario::{Algorithm, Scenario};
use super::trial::{Estimate, TrialRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Estimate assigned to each truth, in truth order.
    pub assigned: Vec<Option<f64>>,
    /// `P` estimates, each within the gate of a distinct truth.
    pub resolved: bool,
}

/// Greedy nearest-neighbour assignment: repeatedly pair the closest free
/// truth and estimate, ties going to the smaller truth.
pub fn match_estimates(estimates: &[f64], truths: &[f64], gate: f64) -> Matching {
    let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(estimates.len() * truths.len());
    for (ti, &t) in truths.iter().enumerate() {
        for (ei, &e) in estimates.iter().enumerate() {
            if e.is_finite() {
                pairs.push(((e - t).abs(), t, ti, ei));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.3.cmp(&b.3)));
    let mut assigned = vec![None; truths.len()];
    let mut used = vec![false; estimates.len()];
    let mut within = 0;
    for (d, _, ti, ei) in pairs {
        if assigned[ti].is_none() && !used[ei] {
            assigned[ti] = Some(estimates[ei]);
            used[ei] = true;
            if d <= gate {
                within += 1;
            }
        }
    }
    let resolved = estimates.len() == truths.len() && within == truths.len();
    Matching { assigned, resolved }
}

pub fn match_estimate(est: &Estimate, truths: &[f64], gate: f64) -> Matching {
    let mut m = match_estimates(&est.values, truths, gate);
    if est.shortfall || est.error.is_some() {
        m.resolved = false;
    }
    m
}

/// `<algorithm>-<axis>`, the label written to the `algorithm` column.
pub fn algorithm_label(algorithm: Algorithm, axis: Axis) -> String {
    format!("{algorithm}-{axis}")
}

/// CP method label, `-` where the estimator has none.
pub fn method_label(method: Option<CpMethod>) -> &'static str {
    method.map_or("-", CpMethod::label)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub axis: Axis,
    pub method: Option<CpMethod>,
    pub snr_db: Option<f64>,
    pub target_idx: usize,
    pub truth: f64,
    /// NaN when no trial resolved.
    pub bias: f64,
    pub rmse: f64,
    pub resolution_prob: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    pub rows: Vec<MetricRow>,
}

/// Statistics of one (algorithm, axis, method) cell over a set of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub n_trials: usize,
    pub resolved: usize,
    /// Trials with fewer estimates than targets.
    pub merged: usize,
    pub truths: Vec<f64>,
    /// Per target, over resolved trials.
    pub bias: Vec<f64>,
    pub rmse: Vec<f64>,
    /// Sample standard deviation of the estimates (n - 1 denominator).
    pub std: Vec<f64>,
    /// Mean estimate.
    pub mean: Vec<f64>,
}

impl CellStats {
    pub fn resolution_prob(&self) -> f64 {
        self.resolved as f64 / self.n_trials as f64
    }
    pub fn merged_prob(&self) -> f64 {
        self.merged as f64 / self.n_trials as f64
    }
}

fn select<'a>(
    records: &'a [TrialRecord],
    algorithm: Algorithm,
    axis: Axis,
    method: Option<CpMethod>,
) -> impl Iterator<Item = &'a Estimate> + 'a {
    records.iter().flat_map(move |r| {
        r.estimates
            .iter()
            .filter(move |e| e.algorithm == algorithm && e.axis == axis && e.method == method)
    })
}

/// Aggregate one cell. Unresolved trials count only towards the
/// resolution probability.
pub fn cell_stats(
    records: &[TrialRecord],
    algorithm: Algorithm,
    axis: Axis,
    method: Option<CpMethod>,
    truths: &[f64],
    gate: f64,
) -> Result<CellStats> {
    let p = truths.len();
    let mut n = 0;
    let mut resolved = 0;
    let mut merged = 0;
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); p];
    for est in select(records, algorithm, axis, method) {
        n += 1;
        if est.values.len() < p {
            merged += 1;
        }
        let m = match_estimate(est, truths, gate);
        if m.resolved {
            resolved += 1;
            for (i, a) in m.assigned.iter().enumerate() {
                samples[i].push(a.expect("resolved trials assign every truth"));
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyInput("trial records for this cell"));
    }
    let mut bias = Vec::with_capacity(p);
    let mut rmse = Vec::with_capacity(p);
    let mut std = Vec::with_capacity(p);
    let mut mean = Vec::with_capacity(p);
    for (i, s) in samples.iter().enumerate() {
        let cnt = s.len() as f64;
        if s.is_empty() {
            bias.push(f64::NAN);
            rmse.push(f64::NAN);
            std.push(f64::NAN);
            mean.push(f64::NAN);
            continue;
        }
        let mu = s.iter().sum::<f64>() / cnt;
        let b = s.iter().map(|e| e - truths[i]).sum::<f64>() / cnt;
        let r = (s.iter().map(|e| (e - truths[i]).powi(2)).sum::<f64>() / cnt).sqrt();
        let sd = if s.len() > 1 {
            (s.iter().map(|e| (e - mu).powi(2)).sum::<f64>() / (cnt - 1.0)).sqrt()
        } else {
            0.0
        };
        bias.push(b);
        rmse.push(r.max(b.abs()));
        std.push(sd);
        mean.push(mu);
    }
    Ok(CellStats {
        n_trials: n,
        resolved,
        merged,
        truths: truths.to_vec(),
        bias,
        rmse,
        std,
        mean,
    })
}

/// Metrics for every (scenario id, algorithm, axis, method) cell present in
/// `records`, in first-appearance order, using `gate(axis)` for matching.
pub fn summarize_with_gate(
    records: &[TrialRecord],
    scenario: &Scenario,
    gate: impl Fn(Axis) -> f64,
) -> Result<MetricsSummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trial records"));
    }
    let mut cells: Vec<(String, Option<f64>, Algorithm, Axis, Option<CpMethod>)> = Vec::new();
    for r in records {
        for e in &r.estimates {
            let key = (r.scenario.clone(), r.snr_db, e.algorithm, e.axis, e.method);
            if !cells.contains(&key) {
                cells.push(key);
            }
        }
    }
    let mut rows = Vec::new();
    for (id, snr, algorithm, axis, method) in cells {
        let subset: Vec<TrialRecord> = records.iter().filter(|r| r.scenario == id).cloned().collect();
        let truths = scenario.truths(axis);
        let stats = cell_stats(&subset, algorithm, axis, method, &truths, gate(axis))?;
        for (i, &truth) in truths.iter().enumerate() {
            rows.push(MetricRow {
                scenario: id.clone(),
                algorithm,
                axis,
                method,
                snr_db: snr,
                target_idx: i,
                truth,
                bias: stats.bias[i],
                rmse: stats.rmse[i],
                resolution_prob: stats.resolution_prob(),
                n_trials: stats.n_trials,
            });
        }
    }
    Ok(MetricsSummary { rows })
}

pub fn summarize(records: &[TrialRecord], scenario: &Scenario) -> Result<MetricsSummary> {
    summarize_with_gate(records, scenario, |axis| scenario.gate(axis))
}
