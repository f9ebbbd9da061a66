//! DFT periodograms along the symbol (Doppler) and subcarrier (delay) axes.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{c64, cis, CMat};
use crate::numerology::{CpMethod, Numerology};
use crate::spectrum::{find_peaks_above, Axis, Peak, PeakList, Spectrum};
use crate::subspace::doppler_covariance;
use crate::waveform::RadarDataMatrix;

/// Default zero-padded length: next power of two at least `4 * dim`.
pub fn default_n_fft(dim: usize) -> usize {
    (4 * dim).next_power_of_two()
}

fn check_n_fft(n_fft: usize, dim: usize, what: &str) -> Result<()> {
    if n_fft < dim {
        return Err(Error::InvalidParameter(format!("n_fft = {n_fft} is shorter than the {dim} {what}")));
    }
    Ok(())
}

/// Doppler bins `n / (n_fft * T_1)` for `n` in `-n_fft/2 .. n_fft/2`, where
/// `T_1` is the method's first symbol time (the normal spacing for Method III).
pub fn doppler_axis(n_fft: usize, spacing: f64) -> Vec<f64> {
    let half = (n_fft / 2) as i64;
    (-half..n_fft as i64 - half)
        .map(|n| n as f64 / (n_fft as f64 * spacing))
        .collect()
}

pub fn doppler_periodogram(y: &RadarDataMatrix, method: CpMethod, n_fft: Option<usize>) -> Result<Spectrum> {
    let (k, l) = (y.n_subcarriers(), y.n_symbols());
    let n = n_fft.unwrap_or_else(|| default_n_fft(l));
    check_n_fft(n, l, "symbols")?;
    let num = &y.numerology;
    let spacing = num.nominal_spacing(method);
    let scale = 1.0 / (k * l) as f64;
    let half = n / 2;
    let mut values = vec![0.0; n];

    match method {
        CpMethod::NormalOnly | CpMethod::FrameAverage => {
            let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
            let mut buf = vec![c64::new(0.0, 0.0); n];
            for row in 0..k {
                buf.iter_mut().for_each(|x| *x = c64::new(0.0, 0.0));
                for col in 0..l {
                    buf[col] = y.data[(row, col)];
                }
                fft.process(&mut buf);
                for (bin, v) in buf.iter().enumerate() {
                    values[(bin + half) % n] += v.norm_sqr();
                }
            }
        }
        CpMethod::Exact => {
            let r = doppler_covariance(y)?;
            values = exact_from_covariance(&r, num.normal_symbol_samples(), &excess_samples(num, l)?, n);
            values.iter_mut().for_each(|v| *v *= k as f64);
        }
    }
    values.iter_mut().for_each(|v| *v *= scale);
    Spectrum::new(Axis::Doppler, doppler_axis(n, spacing), values, Some(method))
}

/// Samples each symbol start lies beyond `l * normal_symbol_samples`.
fn excess_samples(num: &Numerology, l: usize) -> Result<Vec<u64>> {
    let normal = num.normal_symbol_samples();
    (0..l).map(|m| Ok(num.start_sample(m)? - normal * m as u64)).collect()
}

/// `sum_{m,m'} R[m,m'] exp(-j 2 pi nu (T_m - T_m'))` on the grid
/// `nu = n / (n_fft * T_1)`, with `T_m = (m * normal + excess[m]) * T_C`.
/// Entries are grouped by excess difference; each group is a lag sequence
/// handled by one FFT.
fn exact_from_covariance(r: &CMat, normal: u64, excess: &[u64], n: usize) -> Vec<f64> {
    let l = excess.len();
    let mut deltas: Vec<i64> = Vec::new();
    let mut lags: Vec<Vec<c64>> = Vec::new();
    for m in 0..l {
        for mp in 0..l {
            let d = excess[m] as i64 - excess[mp] as i64;
            let slot = match deltas.iter().position(|&x| x == d) {
                Some(i) => i,
                None => {
                    deltas.push(d);
                    lags.push(vec![c64::new(0.0, 0.0); n]);
                    deltas.len() - 1
                }
            };
            let tau = (m as i64 - mp as i64).rem_euclid(n as i64) as usize;
            lags[slot][tau] += r[(m, mp)];
        }
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let half = n / 2;
    let mut values = vec![0.0; n];
    for (d, mut buf) in deltas.into_iter().zip(lags) {
        fft.process(&mut buf);
        let ratio = d as f64 / normal as f64;
        for (bin, v) in buf.iter().enumerate() {
            let idx = (bin + half) % n;
            let nu = idx as f64 - half as f64;
            values[idx] += (v * cis(-2.0 * PI * nu * ratio / n as f64)).re;
        }
    }
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    values
}

pub fn delay_periodogram(y: &RadarDataMatrix, n_fft: Option<usize>) -> Result<Spectrum> {
    let (k, l) = (y.n_subcarriers(), y.n_symbols());
    let n = n_fft.unwrap_or_else(|| default_n_fft(k));
    check_n_fft(n, k, "subcarriers")?;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut buf = vec![c64::new(0.0, 0.0); n];
    let mut values = vec![0.0; n];
    for col in 0..l {
        buf.iter_mut().for_each(|x| *x = c64::new(0.0, 0.0));
        for row in 0..k {
            buf[row] = y.data[(row, col)];
        }
        ifft.process(&mut buf);
        for (v, b) in values.iter_mut().zip(&buf) {
            *v += b.norm_sqr();
        }
    }
    let scale = 1.0 / (k * l) as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    let df = y.numerology.delta_f();
    let axis = (0..n).map(|i| i as f64 / (n as f64 * df)).collect();
    Spectrum::new(Axis::Delay, axis, values, None)
}

/// Doppler periodogram evaluated at an arbitrary frequency.
pub fn doppler_power(y: &RadarDataMatrix, method: CpMethod, doppler_hz: f64) -> Result<f64> {
    let (k, l) = (y.n_subcarriers(), y.n_symbols());
    let times = y.numerology.symbol_times(l, method)?;
    let kernel: Vec<c64> = times.iter().map(|t| cis(-2.0 * PI * doppler_hz * t)).collect();
    let mut total = 0.0;
    for row in 0..k {
        let mut acc = c64::new(0.0, 0.0);
        for (col, w) in kernel.iter().enumerate() {
            acc += y.data[(row, col)] * w;
        }
        total += acc.norm_sqr();
    }
    Ok(total / (k * l) as f64)
}

/// Delay periodogram evaluated at an arbitrary delay.
pub fn delay_power(y: &RadarDataMatrix, delay_s: f64) -> f64 {
    let (k, l) = (y.n_subcarriers(), y.n_symbols());
    let df = y.numerology.delta_f();
    let kernel: Vec<c64> = (0..k).map(|row| cis(2.0 * PI * row as f64 * df * delay_s)).collect();
    let mut total = 0.0;
    for col in 0..l {
        let mut acc = c64::new(0.0, 0.0);
        for (row, w) in kernel.iter().enumerate() {
            acc += y.data[(row, col)] * w;
        }
        total += acc.norm_sqr();
    }
    total / (k * l) as f64
}

/// Maximise `f` on `[a, b]` by golden-section search.
pub(crate) fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Move each peak to the maximum of `power` between its neighbouring bins.
pub(crate) fn refine(spec: &Spectrum, peaks: PeakList, mut power: impl FnMut(f64) -> f64) -> PeakList {
    let n = spec.len();
    let step = if n > 1 { spec.axis[1] - spec.axis[0] } else { 0.0 };
    let refined = peaks
        .peaks
        .into_iter()
        .map(|p| {
            if n < 2 {
                return p;
            }
            let lo = spec.axis[p.index.saturating_sub(1)];
            let hi = spec.axis[(p.index + 1).min(n - 1)];
            let (x, h) = golden_max(&mut power, lo, hi, step * 1e-7);
            if h >= p.height {
                Peak {
                    index: p.index,
                    position: x,
                    height: h,
                }
            } else {
                p
            }
        })
        .collect();
    PeakList {
        peaks: refined,
        shortfall: peaks.shortfall,
    }
}

#[derive(Debug, Clone)]
pub struct PeriodogramOptions {
    pub n_fft: Option<usize>,
    /// Ignore maxima further than this many dB below the global maximum.
    pub floor_db: Option<f64>,
    /// Refine peaks off the FFT grid on the continuous periodogram.
    pub refine: bool,
}

impl Default for PeriodogramOptions {
    fn default() -> Self {
        Self {
            n_fft: None,
            floor_db: Some(10.0),
            refine: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeriodogramEstimate {
    pub spectrum: Spectrum,
    pub peaks: PeakList,
}

pub fn estimate_doppler(
    y: &RadarDataMatrix,
    method: CpMethod,
    p: usize,
    opts: &PeriodogramOptions,
) -> Result<PeriodogramEstimate> {
    let spectrum = doppler_periodogram(y, method, opts.n_fft)?;
    let mut peaks = find_peaks_above(&spectrum, p, opts.floor_db)?;
    if opts.refine {
        peaks = refine(&spectrum, peaks, |f| doppler_power(y, method, f).unwrap_or(0.0));
    }
    Ok(PeriodogramEstimate { spectrum, peaks })
}

pub fn estimate_delay(y: &RadarDataMatrix, p: usize, opts: &PeriodogramOptions) -> Result<PeriodogramEstimate> {
    let spectrum = delay_periodogram(y, opts.n_fft)?;
    let mut peaks = find_peaks_above(&spectrum, p, opts.floor_db)?;
    if opts.refine {
        peaks = refine(&spectrum, peaks, |t| delay_power(y, t));
    }
    Ok(PeriodogramEstimate { spectrum, peaks })
}
