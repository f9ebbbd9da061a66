//! MUSIC pseudospectra and the coarse-to-fine peak search.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c64, cis, product, CMat};
use crate::numerology::{CpMethod, Numerology};
use crate::spectrum::{local_maxima, Axis, Peak, PeakList, Spectrum};

use super::eigen::EigenSplit;

/// Grid points evaluated per GEMM.
const GRID_CHUNK: usize = 256;

/// Smallest denominator kept, so exact nulls stay finite.
const MIN_DENOMINATOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<c64>,
    pub method: Option<CpMethod>,
}

impl SteeringVector {
    /// `exp(j 2 pi f T_l)` with `T_l` the method's cumulative symbol times.
    pub fn doppler(num: &Numerology, method: CpMethod, len: usize, doppler_hz: f64) -> Result<Self> {
        let times = num.symbol_times(len, method)?;
        Ok(Self {
            entries: doppler_entries(&times, doppler_hz).collect(),
            method: Some(method),
        })
    }

    /// `exp(-j 2 pi k tau delta_f)`.
    pub fn delay(len: usize, delta_f: f64, delay_s: f64) -> Self {
        Self {
            entries: delay_entries(len, delta_f, delay_s).collect(),
            method: None,
        }
    }
}

fn doppler_entries(times: &[f64], f: f64) -> impl Iterator<Item = c64> + '_ {
    times.iter().map(move |t| cis(2.0 * PI * f * t))
}

fn delay_entries(len: usize, df: f64, tau: f64) -> impl Iterator<Item = c64> {
    (0..len).map(move |k| cis(-2.0 * PI * k as f64 * df * tau))
}

/// `1 / ||E_n^H x(theta)||^2` on `grid` (Hz for Doppler, seconds for delay).
pub fn music_spectrum(
    split: &EigenSplit,
    axis: Axis,
    num: &Numerology,
    method: Option<CpMethod>,
    grid: &[f64],
) -> Result<Spectrum> {
    if split.axis != axis {
        return Err(Error::InvalidParameter(format!(
            "{} pseudospectrum requested from a {} subspace",
            axis, split.axis
        )));
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput("MUSIC grid"));
    }
    let dim = split.dim();
    let times = match axis {
        Axis::Doppler => {
            let m = method.ok_or_else(|| Error::InvalidParameter("Doppler MUSIC needs a CP method".into()))?;
            Some(num.symbol_times(dim, m)?)
        }
        Axis::Delay => None,
    };
    let df = num.delta_f();
    let en_h = split.noise_basis.adjoint();
    let mut values = Vec::with_capacity(grid.len());
    for chunk in grid.chunks(GRID_CHUNK) {
        let mut x = CMat::zeros(dim, chunk.len());
        for (c, &theta) in chunk.iter().enumerate() {
            match &times {
                Some(t) => doppler_entries(t, theta).enumerate().for_each(|(i, v)| x[(i, c)] = v),
                None => delay_entries(dim, df, theta).enumerate().for_each(|(i, v)| x[(i, c)] = v),
            }
        }
        let proj = product(en_h, x.as_ref(), 1.0);
        for c in 0..chunk.len() {
            let denom: f64 = (0..proj.nrows()).map(|i| proj[(i, c)].norm_sqr()).sum();
            values.push(1.0 / denom.max(MIN_DENOMINATOR));
        }
    }
    Spectrum::new(axis, grid.to_vec(), values, method.filter(|_| axis == Axis::Doppler))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MusicOptions {
    /// Half-width of each fine window in Rayleigh cells.
    pub window_cells: f64,
    pub doppler_step_hz: f64,
    /// Delay step as a fraction of the delay Rayleigh cell.
    pub delay_step_cells: f64,
}

impl Default for MusicOptions {
    fn default() -> Self {
        Self {
            window_cells: 2.0,
            doppler_step_hz: 1.0,
            delay_step_cells: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MusicEstimate {
    /// Pseudospectrum over the union of the fine windows.
    pub spectrum: Spectrum,
    pub peaks: PeakList,
    /// Merged fine windows as `(first, last)` grid values.
    pub windows: Vec<(f64, f64)>,
}

/// Evaluate the pseudospectrum on fine grids around `coarse` peak positions
/// and return the `p` strongest interior maxima. `rayleigh` is the
/// resolution cell of the axis, which sizes the windows.
pub fn music_search(
    split: &EigenSplit,
    num: &Numerology,
    method: Option<CpMethod>,
    coarse: &[f64],
    p: usize,
    rayleigh: f64,
    opts: &MusicOptions,
) -> Result<MusicEstimate> {
    if coarse.is_empty() {
        return Err(Error::EmptyInput("coarse peak list"));
    }
    if p == 0 {
        return Err(Error::ZeroDimension("requested peak count"));
    }
    let step = match split.axis {
        Axis::Doppler => opts.doppler_step_hz,
        Axis::Delay => opts.delay_step_cells * rayleigh,
    };
    if !(step > 0.0 && rayleigh > 0.0 && opts.window_cells > 0.0) {
        return Err(Error::InvalidParameter("MUSIC grid step and window must be positive".into()));
    }
    let half = opts.window_cells * rayleigh;
    let mut ranges: Vec<(i64, i64)> = coarse
        .iter()
        .map(|c| (((c - half) / step).floor() as i64, ((c + half) / step).ceil() as i64))
        .collect();
    ranges.sort();
    let mut merged: Vec<(i64, i64)> = Vec::new();
    for r in ranges {
        match merged.last_mut() {
            Some(last) if r.0 <= last.1 + 1 => last.1 = last.1.max(r.1),
            _ => merged.push(r),
        }
    }

    let grid: Vec<f64> = merged.iter().flat_map(|&(a, b)| (a..=b).map(move |i| i as f64 * step)).collect();
    let spectrum = music_spectrum(split, split.axis, num, method, &grid)?;

    let mut peaks = Vec::new();
    let mut offset = 0;
    for &(a, b) in &merged {
        let len = (b - a + 1) as usize;
        let window = &spectrum.values[offset..offset + len];
        for i in local_maxima(window) {
            if i > 0 && i + 1 < len {
                peaks.push(Peak {
                    index: offset + i,
                    position: spectrum.axis[offset + i],
                    height: window[i],
                });
            }
        }
        offset += len;
    }
    peaks.sort_by(|x, y| y.height.total_cmp(&x.height).then(x.index.cmp(&y.index)));
    let shortfall = peaks.len() < p;
    peaks.truncate(p);
    let windows = merged.iter().map(|&(a, b)| (a as f64 * step, b as f64 * step)).collect();
    Ok(MusicEstimate {
        spectrum,
        peaks: PeakList { peaks, shortfall },
        windows,
    })
}
