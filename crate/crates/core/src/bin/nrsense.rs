use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nrsense::harness::{
    run_scenario, run_trial, summarize, trial_seeds, write_outputs, write_spectra, Manifest, MetricsSummary,
    Scenario, TrialOptions,
};
use nrsense::harness::metrics::{algorithm_label, method_label};
use nrsense::{Error, Result};

#[derive(Parser)]
#[command(name = "nrsense", version, about = "Delay/Doppler sensing simulations on 5G NR frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Override the scenario's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the scenario's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the scenario's `out_dir`, else `out/<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the full 264 RB x 1120 symbol frame.
    #[arg(long)]
    full_size: bool,
    /// Record per-estimator wall time in trials.csv instead of 0.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    Snr,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of a scenario and write metrics.csv, trials.csv and manifest.json.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Dump the spectra of one trial, one CSV per (algorithm, method, axis).
    Spectra {
        scenario: PathBuf,
        #[arg(long)]
        trial: usize,
        #[arg(long)]
        out: PathBuf,
        /// SNR to use (default: the scenario's first).
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        full_size: bool,
    },
    /// Run a scenario over a list of parameter values.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn load(path: &Path, full_size: bool) -> Result<Scenario> {
    let s = Scenario::from_path(path)?;
    if full_size {
        s.full_size()
    } else {
        Ok(s)
    }
}

fn apply_run_args(mut s: Scenario, run: &RunArgs) -> Result<Scenario> {
    if let Some(n) = run.trials {
        if n == 0 {
            return Err(Error::Scenario("--trials must be at least 1".into()));
        }
        s.n_trials = n;
    }
    if let Some(seed) = run.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn out_dir(s: &Scenario, cli: Option<&PathBuf>) -> PathBuf {
    cli.cloned()
        .or_else(|| s.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&s.name))
}

fn print_summary(summary: &MetricsSummary) {
    println!(
        "{:<24} {:<20} {:<6} {:>10} {:>4} {:>16} {:>14} {:>14} {:>7}",
        "scenario", "algorithm", "method", "snr_db", "tgt", "truth", "bias", "rmse", "p_res"
    );
    for r in &summary.rows {
        println!(
            "{:<24} {:<20} {:<6} {:>10} {:>4} {:>16.6e} {:>14.4e} {:>14.4e} {:>7.3}",
            r.scenario,
            algorithm_label(r.algorithm, r.axis),
            method_label(r.method),
            r.snr_db.map_or_else(|| "-".to_string(), |s| s.to_string()),
            r.target_idx,
            r.truth,
            r.bias,
            r.rmse,
            r.resolution_prob
        );
    }
}

fn simulate(path: &Path, scenario: Scenario, run: &RunArgs) -> Result<()> {
    let dir = out_dir(&scenario, run.out.as_ref());
    let records = run_scenario(&scenario, run.timing)?;
    let summary = summarize(&records, &scenario)?;
    let command: Vec<String> = std::env::args().collect();
    let seeds = trial_seeds(&scenario);
    write_outputs(&dir, &summary, &records, &scenario, |files| {
        Manifest::new(&scenario, Some(path), command, seeds, files)
    })?;
    print_summary(&summary);
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, run } => {
            let s = apply_run_args(load(&scenario, run.full_size)?, &run)?;
            simulate(&scenario, s, &run)
        }
        Command::Sweep {
            scenario,
            param: SweepParam::Snr,
            values,
            run,
        } => {
            let mut s = apply_run_args(load(&scenario, run.full_size)?, &run)?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Scenario("sweep values must be finite".into()));
            }
            s.snr_db = values.into_iter().map(Some).collect();
            simulate(&scenario, s, &run)
        }
        Command::Spectra {
            scenario,
            trial,
            out,
            snr,
            seed,
            full_size,
        } => {
            let mut s = load(&scenario, full_size)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let snr = match snr {
                Some(v) => Some(v),
                None => s.snr_db[0],
            };
            let opts = TrialOptions {
                timing: false,
                capture_spectra: true,
            };
            let (_, spectra) = run_trial(&s, trial, snr, opts)?;
            for p in write_spectra(&out, &spectra)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
