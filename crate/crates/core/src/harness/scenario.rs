//! Scenario files: flat TOML keys plus one `[[target]]` table per target.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{Target, TargetSet};
use crate::error::{Error, Result};
use crate::linalg::c64;
use crate::numerology::{CpMethod, Numerology, DEFAULT_C0, DEFAULT_CARRIER_HZ};
use crate::periodogram::PeriodogramOptions;
use crate::spectrum::Axis;
use crate::subspace::{MusicOptions, DEFAULT_RHO};
use crate::waveform::Constellation;

/// Desk-scale grid used when a scenario does not size its own.
pub const DESK_N_RB: usize = 20;
pub const DESK_N_SYMBOLS: usize = 112;
pub const FULL_N_RB: usize = 264;

/// Relative mismatch tolerated between a distance and a delay (or velocity
/// and Doppler) given for the same target.
const UNIT_CONFLICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Periodogram,
    Music,
    Esprit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Periodogram, Algorithm::Music, Algorithm::Esprit];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Periodogram => "periodogram",
            Algorithm::Music => "music",
            Algorithm::Esprit => "esprit",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodogram" => Ok(Algorithm::Periodogram),
            "music" => Ok(Algorithm::Music),
            "esprit" => Ok(Algorithm::Esprit),
            other => Err(Error::Scenario(format!("unknown algorithm tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Synthesis {
    /// Closed-form radar matrix, arbitrary fractional delays.
    Symbol,
    /// Modulate, delay and rotate in time, demodulate. Delays snap to `T_C`.
    Time,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    distance_m: Option<f64>,
    delay_s: Option<f64>,
    velocity_mps: Option<f64>,
    doppler_hz: Option<f64>,
    alpha_mag: Option<f64>,
    alpha_phase_rad: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    mu: Option<u32>,
    n_rb: Option<usize>,
    n_symbols: Option<usize>,
    carrier_hz: Option<f64>,
    c0: Option<f64>,
    snr_db: Option<Vec<f64>>,
    noiseless: Option<bool>,
    n_trials: Option<usize>,
    seed: Option<u64>,
    algorithms: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    axes: Option<Vec<String>>,
    constellation: Option<String>,
    synthesis: Option<Synthesis>,
    random_phase: Option<bool>,
    rho: Option<f64>,
    forward_backward: Option<bool>,
    music_window_cells: Option<f64>,
    music_doppler_step_hz: Option<f64>,
    music_delay_step_cells: Option<f64>,
    periodogram_floor_db: Option<f64>,
    periodogram_refine: Option<bool>,
    doppler_n_fft: Option<usize>,
    delay_n_fft: Option<usize>,
    gate_fraction: Option<f64>,
    out_dir: Option<PathBuf>,
    #[serde(default)]
    target: Vec<RawTarget>,
}

/// A target with both its physical and signal-level description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTarget {
    pub distance_m: f64,
    pub velocity_mps: f64,
    pub target: Target,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub numerology: Numerology,
    pub targets: Vec<ResolvedTarget>,
    /// `None` entries are noiseless runs.
    pub snr_db: Vec<Option<f64>>,
    pub n_trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub methods: Vec<CpMethod>,
    pub axes: Vec<Axis>,
    pub constellation: Constellation,
    pub synthesis: Synthesis,
    /// Draw a fresh uniform phase for every target in every trial.
    pub random_phase: bool,
    pub rho: f64,
    pub forward_backward: bool,
    pub music: MusicOptions,
    pub doppler_periodogram: PeriodogramOptions,
    pub delay_periodogram: PeriodogramOptions,
    /// Matching gate as a fraction of the smallest true separation.
    pub gate_fraction: f64,
    pub out_dir: Option<PathBuf>,
}

fn parse_list<T: FromStr<Err = Error>>(items: Option<Vec<String>>, default: &[T]) -> Result<Vec<T>>
where
    T: Clone + PartialEq,
{
    let Some(items) = items else {
        return Ok(default.to_vec());
    };
    let mut out: Vec<T> = Vec::new();
    for s in items {
        let v = s.parse::<T>().map_err(|e| Error::Scenario(e.to_string()))?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::Scenario("empty selection list".into()));
    }
    Ok(out)
}

fn consistent(a: f64, b: f64) -> bool {
    (a - b).abs() <= UNIT_CONFLICT_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn resolve_target(i: usize, raw: &RawTarget, num: &Numerology) -> Result<ResolvedTarget> {
    let delay_s = match (raw.distance_m, raw.delay_s) {
        (Some(d), Some(t)) => {
            if !consistent(num.delay_from_distance(d), t) {
                return Err(Error::Scenario(format!("target {i}: distance {d} m conflicts with delay {t} s")));
            }
            t
        }
        (Some(d), None) => num.delay_from_distance(d),
        (None, Some(t)) => t,
        (None, None) => return Err(Error::Scenario(format!("target {i}: missing distance_m or delay_s"))),
    };
    let doppler_hz = match (raw.velocity_mps, raw.doppler_hz) {
        (Some(v), Some(f)) => {
            if !consistent(num.doppler_from_velocity(v), f) {
                return Err(Error::Scenario(format!("target {i}: velocity {v} m/s conflicts with Doppler {f} Hz")));
            }
            f
        }
        (Some(v), None) => num.doppler_from_velocity(v),
        (None, Some(f)) => f,
        (None, None) => return Err(Error::Scenario(format!("target {i}: missing velocity_mps or doppler_hz"))),
    };
    let mag = raw.alpha_mag.unwrap_or(1.0);
    let phase = raw.alpha_phase_rad.unwrap_or(0.0);
    let target = Target::new(c64::from_polar(mag, phase), delay_s, doppler_hz);
    Ok(ResolvedTarget {
        distance_m: num.distance_from_delay(delay_s),
        velocity_mps: num.velocity_from_doppler(doppler_hz),
        target,
    })
}

impl Scenario {
    pub fn from_toml_str(text: &str, default_name: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        Self::from_raw(raw, default_name)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::from_toml_str(&text, stem)
    }

    fn from_raw(raw: RawScenario, default_name: &str) -> Result<Self> {
        let num = Numerology::new(
            raw.mu.unwrap_or(3),
            raw.n_rb.unwrap_or(DESK_N_RB),
            raw.n_symbols.unwrap_or(DESK_N_SYMBOLS),
        )
        .map_err(|e| Error::Scenario(e.to_string()))?
        .with_carrier(raw.carrier_hz.unwrap_or(DEFAULT_CARRIER_HZ))
        .with_c0(raw.c0.unwrap_or(DEFAULT_C0));

        if raw.target.is_empty() {
            return Err(Error::Scenario("scenario needs at least one [[target]]".into()));
        }
        let targets = raw
            .target
            .iter()
            .enumerate()
            .map(|(i, t)| resolve_target(i, t, &num))
            .collect::<Result<Vec<_>>>()?;

        let snr_db = if raw.noiseless.unwrap_or(false) {
            vec![None]
        } else {
            let list = raw.snr_db.unwrap_or_else(|| vec![15.0]);
            if list.is_empty() || list.iter().any(|s| !s.is_finite()) {
                return Err(Error::Scenario("snr_db must be a non-empty list of finite values".into()));
            }
            list.into_iter().map(Some).collect()
        };

        let n_trials = raw.n_trials.unwrap_or(1);
        if n_trials == 0 {
            return Err(Error::Scenario("n_trials must be at least 1".into()));
        }

        let constellation = match raw.constellation {
            Some(c) => c.parse().map_err(|e: Error| Error::Scenario(e.to_string()))?,
            None => Constellation::Qpsk,
        };

        let floor = raw.periodogram_floor_db.unwrap_or(10.0);
        let periodogram = |n_fft| PeriodogramOptions {
            n_fft,
            floor_db: if floor > 0.0 { Some(floor) } else { None },
            refine: raw.periodogram_refine.unwrap_or(true),
        };
        let defaults = MusicOptions::default();

        let scenario = Self {
            name: raw.name.unwrap_or_else(|| default_name.to_string()),
            targets,
            snr_db,
            n_trials,
            seed: raw.seed.unwrap_or(0),
            algorithms: parse_list(raw.algorithms, &Algorithm::ALL)?,
            methods: parse_list(raw.methods, &CpMethod::ALL)?,
            axes: parse_list(raw.axes, &[Axis::Doppler, Axis::Delay])?,
            constellation,
            synthesis: raw.synthesis.unwrap_or(Synthesis::Symbol),
            random_phase: raw.random_phase.unwrap_or(false),
            rho: raw.rho.unwrap_or(DEFAULT_RHO),
            forward_backward: raw.forward_backward.unwrap_or(false),
            music: MusicOptions {
                window_cells: raw.music_window_cells.unwrap_or(defaults.window_cells),
                doppler_step_hz: raw.music_doppler_step_hz.unwrap_or(defaults.doppler_step_hz),
                delay_step_cells: raw.music_delay_step_cells.unwrap_or(defaults.delay_step_cells),
            },
            doppler_periodogram: periodogram(raw.doppler_n_fft),
            delay_periodogram: periodogram(raw.delay_n_fft),
            gate_fraction: raw.gate_fraction.unwrap_or(0.5),
            out_dir: raw.out_dir,
            numerology: num,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        self.target_set()
            .validate(&self.numerology)
            .map_err(|e| Error::Scenario(e.to_string()))?;
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Scenario(format!("rho = {} outside (0, 1)", self.rho)));
        }
        if !(self.gate_fraction > 0.0) {
            return Err(Error::Scenario("gate_fraction must be positive".into()));
        }
        Ok(())
    }

    pub fn target_set(&self) -> TargetSet {
        TargetSet::new(self.targets.iter().map(|t| t.target).collect())
    }

    pub fn order(&self) -> usize {
        self.targets.len()
    }

    /// Ground truth along an axis (Hz or seconds), in target order.
    pub fn truths(&self, axis: Axis) -> Vec<f64> {
        self.targets
            .iter()
            .map(|t| match axis {
                Axis::Doppler => t.target.doppler_hz,
                Axis::Delay => t.target.delay_s,
            })
            .collect()
    }

    /// Half (by default) the smallest separation between true values, or
    /// infinity for a single target.
    pub fn gate(&self, axis: Axis) -> f64 {
        let mut t = self.truths(axis);
        t.sort_by(f64::total_cmp);
        let min_sep = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        self.gate_fraction * min_sep
    }

    /// Switch to the full 264 RB by one-frame grid.
    pub fn full_size(mut self) -> Result<Self> {
        let mu = self.numerology.mu();
        self.numerology = Numerology::new(mu, FULL_N_RB, Numerology::symbols_per_frame(mu))?
            .with_carrier(self.numerology.carrier_hz())
            .with_c0(self.numerology.c0());
        self.validate()?;
        Ok(self)
    }

    pub fn has(&self, algorithm: Algorithm) -> bool {
        self.algorithms.contains(&algorithm)
    }
}
