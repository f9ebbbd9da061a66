//! Point-target echoes and receiver noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, cis, CMat};
use crate::numerology::{CpMethod, Numerology};
use crate::waveform::{RadarDataMatrix, SampleStream};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub alpha: c64,
    pub delay_s: f64,
    pub doppler_hz: f64,
}

impl Target {
    pub fn new(alpha: c64, delay_s: f64, doppler_hz: f64) -> Self {
        Self {
            alpha,
            delay_s,
            doppler_hz,
        }
    }

    pub fn unit(delay_s: f64, doppler_hz: f64) -> Self {
        Self::new(c64::new(1.0, 0.0), delay_s, doppler_hz)
    }

    pub fn distance_m(&self, num: &Numerology) -> f64 {
        num.distance_from_delay(self.delay_s)
    }

    pub fn velocity_mps(&self, num: &Numerology) -> f64 {
        num.velocity_from_doppler(self.doppler_hz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub targets: Vec<Target>,
}

impl TargetSet {
    pub fn new(targets: Vec<Target>) -> Self {
        Self { targets }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `sum_p |alpha_p|^2`.
    pub fn total_power(&self) -> f64 {
        self.targets.iter().map(|t| t.alpha.norm_sqr()).sum()
    }

    pub fn validate(&self, num: &Numerology) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::EmptyInput("target set"));
        }
        let max_delay = num.min_cp_duration();
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.alpha.re.is_finite() && t.alpha.im.is_finite()) || t.alpha.norm() == 0.0 {
                return Err(Error::ModelViolation(format!("target {i}: reflection coefficient must be finite and non-zero")));
            }
            if !t.doppler_hz.is_finite() {
                return Err(Error::ModelViolation(format!("target {i}: Doppler is not finite")));
            }
            if !(t.delay_s >= 0.0 && t.delay_s < max_delay) {
                return Err(Error::ModelViolation(format!(
                    "target {i}: delay {:e} s outside [0, {:e}) (shortest CP)",
                    t.delay_s, max_delay
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per resource element SNR; `None` means noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db: Some(snr_db),
            seed,
        }
    }

    pub fn noiseless() -> Self {
        Self { snr_db: None, seed: 0 }
    }

    /// Per-element noise variance for the given total echo power.
    pub fn variance(&self, signal_power: f64) -> f64 {
        match self.snr_db {
            Some(snr) => signal_power / 10f64.powf(snr / 10.0),
            None => 0.0,
        }
    }
}

/// Noise-free radar data matrix evaluated in closed form from the exact
/// symbol start times.
pub fn synthesize_symbol_domain(num: &Numerology, targets: &TargetSet, k: usize, l: usize) -> Result<RadarDataMatrix> {
    if k == 0 || l == 0 {
        return Err(Error::ZeroDimension("synthesized grid"));
    }
    targets.validate(num)?;
    let times = num.symbol_times(l, CpMethod::Exact)?;
    let df = num.delta_f();
    let mut data = CMat::zeros(k, l);
    for t in &targets.targets {
        let rows: Vec<c64> = (0..k).map(|kk| cis(-2.0 * PI * kk as f64 * df * t.delay_s)).collect();
        for (col, &time) in times.iter().enumerate() {
            let c = t.alpha * cis(2.0 * PI * t.doppler_hz * time);
            for (row, &r) in rows.iter().enumerate() {
                data[(row, col)] += c * r;
            }
        }
    }
    RadarDataMatrix::new(data, num.clone())
}

/// A delay that had to be rounded onto the sample grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationNotice {
    pub target: usize,
    pub requested_s: f64,
    pub applied_s: f64,
}

#[derive(Debug, Clone)]
pub struct TimeDomainEcho {
    pub stream: SampleStream,
    pub notices: Vec<QuantizationNotice>,
}

/// Superpose delayed, Doppler-rotated copies of the transmitted stream.
/// The output has the input's length; samples shifted past the end are
/// dropped and the leading gap is zero.
pub fn apply_time_domain(stream: &SampleStream, targets: &TargetSet, num: &Numerology) -> Result<TimeDomainEcho> {
    targets.validate(num)?;
    let t_c = num.t_c();
    let n = stream.len();
    let mut out = vec![c64::new(0.0, 0.0); n];
    let mut notices = Vec::new();
    for (i, t) in targets.targets.iter().enumerate() {
        let exact = t.delay_s / t_c;
        let shift = exact.round();
        if (exact - shift).abs() > 1e-6 {
            notices.push(QuantizationNotice {
                target: i,
                requested_s: t.delay_s,
                applied_s: shift * t_c,
            });
        }
        let shift = shift as usize;
        let w = 2.0 * PI * t.doppler_hz * t_c;
        for idx in shift..n {
            let rot = if t.doppler_hz == 0.0 { c64::new(1.0, 0.0) } else { cis(w * idx as f64) };
            out[idx] += t.alpha * stream.samples[idx - shift] * rot;
        }
    }
    Ok(TimeDomainEcho {
        stream: SampleStream { samples: out },
        notices,
    })
}

/// Add circular complex Gaussian noise with variance set by `noise` relative
/// to `signal_power`.
pub fn add_awgn(matrix: &RadarDataMatrix, noise: &NoiseSpec, signal_power: f64) -> Result<RadarDataMatrix> {
    if !matrix.is_finite() {
        return Err(Error::InvalidParameter("radar data matrix has non-finite entries".into()));
    }
    let Some(snr) = noise.snr_db else {
        return Ok(matrix.clone());
    };
    if !snr.is_finite() {
        return Err(Error::InvalidParameter(format!("SNR {snr} dB is not finite")));
    }
    let sigma = (noise.variance(signal_power) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = matrix.clone();
    for col in 0..out.data.ncols() {
        for row in 0..out.data.nrows() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            out.data[(row, col)] += c64::new(sigma * re, sigma * im);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{build_radar_matrix, demodulate_frame, generate_payload, modulate_frame, Constellation};

    fn desk() -> Numerology {
        Numerology::desk()
    }

    #[test]
    fn static_target_is_all_ones() {
        let num = desk();
        let r = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(0.0, 0.0)]), 240, 112).unwrap();
        for j in 0..112 {
            for i in 0..240 {
                assert!((r.data[(i, j)] - c64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn fractional_delay_row_phase() {
        let num = desk();
        let tau = 2.5e-9;
        let r = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(tau, 0.0)]), 240, 4).unwrap();
        for j in 0..4 {
            for i in 0..240 {
                let expected = cis(-2.0 * PI * i as f64 * num.delta_f() * tau);
                assert!((r.data[(i, j)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_staircase_at_long_cp() {
        let num = Numerology::full_frame();
        let f = 12e3;
        let r = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(0.0, f)]), 1, 1120).unwrap();
        let step = |l: usize| (r.data[(0, l + 1)] / r.data[(0, l)]).arg();
        let base = step(1);
        let jump = 2.0 * PI * f * 1024.0 * num.t_c();
        assert!((jump - 0.0393).abs() < 1e-4);
        for l in 0..1119 {
            let expected = if l % num.eta() == 0 { base + jump } else { base };
            assert!((step(l) - expected).abs() < 1e-9, "hop {l}");
        }
    }

    #[test]
    fn delay_beyond_cp_rejected() {
        let num = desk();
        let set = TargetSet::new(vec![Target::unit(num.min_cp_duration(), 0.0)]);
        assert!(matches!(synthesize_symbol_domain(&num, &set, 4, 4), Err(Error::ModelViolation(_))));
        assert!(TargetSet::new(vec![]).validate(&num).is_err());
        let zero = TargetSet::new(vec![Target::new(c64::new(0.0, 0.0), 0.0, 0.0)]);
        assert!(zero.validate(&num).is_err());
    }

    #[test]
    fn identity_channel() {
        let num = Numerology::new(3, 2, 2).unwrap();
        let grid = generate_payload(1, 24, 2, Constellation::Qpsk).unwrap();
        let s = modulate_frame(&grid, &num).unwrap();
        let out = apply_time_domain(&s, &TargetSet::new(vec![Target::unit(0.0, 0.0)]), &num).unwrap();
        assert_eq!(out.stream.samples, s.samples);
        assert!(out.notices.is_empty());
    }

    #[test]
    fn linearity_of_duplicate_targets() {
        let num = Numerology::new(3, 2, 2).unwrap();
        let grid = generate_payload(1, 24, 2, Constellation::Qpsk).unwrap();
        let s = modulate_frame(&grid, &num).unwrap();
        let t = Target::unit(100.0 * num.t_c(), 3e3);
        let one = apply_time_domain(&s, &TargetSet::new(vec![t]), &num).unwrap();
        let two = apply_time_domain(&s, &TargetSet::new(vec![t, t]), &num).unwrap();
        for (a, b) in one.stream.samples.iter().zip(&two.stream.samples) {
            assert!((b - a * 2.0).norm() < 1e-12);
        }
    }

    #[test]
    fn off_grid_delay_reports_quantization() {
        let num = Numerology::new(3, 1, 1).unwrap();
        let grid = generate_payload(1, 12, 1, Constellation::Qpsk).unwrap();
        let s = modulate_frame(&grid, &num).unwrap();
        let out = apply_time_domain(&s, &TargetSet::new(vec![Target::unit(10.4 * num.t_c(), 0.0)]), &num).unwrap();
        assert_eq!(out.notices.len(), 1);
        assert!((out.notices[0].applied_s - 10.0 * num.t_c()).abs() < 1e-20);
    }

    #[test]
    fn time_domain_matches_closed_form_without_doppler() {
        let num = desk();
        let set = TargetSet::new(vec![Target::unit(300.0 * num.t_c(), 0.0)]);
        let grid = generate_payload(3, 240, 8, Constellation::Qpsk).unwrap();
        let s = modulate_frame(&grid, &num).unwrap();
        let echo = apply_time_domain(&s, &set, &num).unwrap();
        let y = demodulate_frame(&echo.stream, &num, 240, 8).unwrap();
        let td = build_radar_matrix(&y, &grid, &num).unwrap();
        let sd = synthesize_symbol_domain(&num, &set, 240, 8).unwrap();
        for j in 0..8 {
            for i in 0..240 {
                assert!((td.data[(i, j)] - sd.data[(i, j)]).norm() <= 1e-9 * sd.data[(i, j)].norm());
            }
        }
    }

    #[test]
    fn noiseless_is_identity_and_seeded_noise_repeats() {
        let num = desk();
        let r = synthesize_symbol_domain(&num, &TargetSet::new(vec![Target::unit(0.0, 1e3)]), 16, 8).unwrap();
        let same = add_awgn(&r, &NoiseSpec::noiseless(), 1.0).unwrap();
        assert_eq!(same.data, r.data);
        let a = add_awgn(&r, &NoiseSpec::new(10.0, 9), 1.0).unwrap();
        let b = add_awgn(&r, &NoiseSpec::new(10.0, 9), 1.0).unwrap();
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, r.data);
    }

    #[test]
    fn empirical_snr_full_frame() {
        let num = Numerology::full_frame();
        let set = TargetSet::new(vec![Target::unit(0.0, 0.0)]);
        let clean = synthesize_symbol_domain(&num, &set, 3168, 1120).unwrap();
        let noisy = add_awgn(&clean, &NoiseSpec::new(15.0, 4), set.total_power()).unwrap();
        let mut p = 0.0;
        for j in 0..1120 {
            for i in 0..3168 {
                p += (noisy.data[(i, j)] - clean.data[(i, j)]).norm_sqr();
            }
        }
        let snr = 10.0 * (1.0 / (p / (3168.0 * 1120.0))).log10();
        assert!((snr - 15.0).abs() < 0.1, "{snr}");
    }

    #[test]
    fn qpsk_division_preserves_noise_variance() {
        let num = Numerology::new(3, 40, 280).unwrap();
        let grid = generate_payload(5, 480, 280, Constellation::Qpsk).unwrap();
        let zero = RadarDataMatrix::new(CMat::zeros(480, 280), num.clone()).unwrap();
        let w = add_awgn(&zero, &NoiseSpec::new(0.0, 8), 1.0).unwrap();
        let r = build_radar_matrix(&w.data, &grid, &num).unwrap();
        let n = 480.0 * 280.0;
        let (mut before, mut after) = (0.0, 0.0);
        for j in 0..280 {
            for i in 0..480 {
                before += w.data[(i, j)].norm_sqr();
                after += r.data[(i, j)].norm_sqr();
            }
        }
        assert!(n >= 1e5);
        assert!(((after / n) / (before / n) - 1.0).abs() < 0.05);
        assert!((after / n - 1.0).abs() < 0.05);
    }
}
