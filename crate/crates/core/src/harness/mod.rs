//! Scenario-driven Monte Carlo runs.

pub mod metrics;
pub mod output;
pub mod scenario;
pub mod trial;

pub use metrics::{cell_stats, match_estimates, summarize, summarize_with_gate, CellStats, MetricRow, MetricsSummary};
pub use output::{write_outputs, write_spectra, Manifest};
pub use scenario::{Algorithm, Scenario, Synthesis};
pub use trial::{observe, run_trial, trial_seed, Estimate, TaggedSpectrum, TrialOptions, TrialRecord};

use rayon::prelude::*;

use crate::error::Result;

/// Seeds of every trial in the scenario, by trial index.
pub fn trial_seeds(scenario: &Scenario) -> Vec<u64> {
    (0..scenario.n_trials).map(|i| trial_seed(scenario.seed, i as u64)).collect()
}

/// All trials at every SNR of the scenario. Trials run in parallel; the
/// result is ordered by SNR, then trial index.
pub fn run_scenario(scenario: &Scenario, timing: bool) -> Result<Vec<TrialRecord>> {
    let opts = TrialOptions {
        timing,
        capture_spectra: false,
    };
    let mut records = Vec::with_capacity(scenario.n_trials * scenario.snr_db.len());
    for &snr in &scenario.snr_db {
        let batch = (0..scenario.n_trials)
            .into_par_iter()
            .map(|i| run_trial(scenario, i, snr, opts).map(|(r, _)| r))
            .collect::<Result<Vec<_>>>()?;
        records.extend(batch);
    }
    Ok(records)
}
