//! NR frame timing.
//!
//! Every duration is kept as an integer count of the basic time unit `T_C`
//! and converted to seconds only at the API edge, so frame-level identities
//! (symbol durations summing to the frame length, the long-CP staircase)
//! hold exactly.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio between the LTE and NR basic time units.
pub const KAPPA: u64 = 64;

/// Largest subcarrier spacing (Hz) used to define `T_C`.
const DELTA_F_MAX: f64 = 480e3;
const N_F: f64 = 4096.0;

/// NR basic time unit in seconds, `1 / (480 kHz * 4096)`.
pub const T_C: f64 = 1.0 / (DELTA_F_MAX * N_F);

/// Speed of light used for distance/velocity conversions. The reference
/// numbers for this waveform (63.75 m/s <-> 11.90 kHz at 28 GHz) are quoted
/// with 3e8 m/s.
pub const DEFAULT_C0: f64 = 3.0e8;

pub const DEFAULT_CARRIER_HZ: f64 = 28e9;

/// How the symbol-domain phase progression is mapped to time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CpMethod {
    /// Method I: every symbol is assumed to carry a normal CP.
    #[serde(rename = "I")]
    NormalOnly,
    /// Method II: every symbol is assumed to last the frame-average duration.
    #[serde(rename = "II")]
    FrameAverage,
    /// Method III: exact cumulative timing including the long CPs.
    #[serde(rename = "III")]
    Exact,
}

impl CpMethod {
    pub const ALL: [CpMethod; 3] = [CpMethod::NormalOnly, CpMethod::FrameAverage, CpMethod::Exact];

    pub fn label(self) -> &'static str {
        match self {
            CpMethod::NormalOnly => "I",
            CpMethod::FrameAverage => "II",
            CpMethod::Exact => "III",
        }
    }
}

impl fmt::Display for CpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CpMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" | "NORMAL" => Ok(CpMethod::NormalOnly),
            "II" | "2" | "AVERAGE" => Ok(CpMethod::FrameAverage),
            "III" | "3" | "EXACT" => Ok(CpMethod::Exact),
            other => Err(Error::InvalidParameter(format!("unknown CP method {other:?}"))),
        }
    }
}

/// NR numerology plus the frame/grid extent used for sensing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerology {
    mu: u32,
    n_rb: usize,
    n_symb: usize,
    carrier_hz: f64,
    c0: f64,
    long_cp: bool,
}

impl Numerology {
    /// `n_symb` may be shorter than a full 10 ms frame (desk-scale runs) but
    /// never longer.
    pub fn new(mu: u32, n_rb: usize, n_symb: usize) -> Result<Self> {
        if mu > 6 {
            return Err(Error::InvalidParameter(format!("mu = {mu} outside 0..=6")));
        }
        if n_rb == 0 {
            return Err(Error::ZeroDimension("n_rb"));
        }
        if n_symb == 0 {
            return Err(Error::ZeroDimension("n_symb"));
        }
        let full = Self::symbols_per_frame(mu);
        if n_symb > full {
            return Err(Error::InvalidParameter(format!(
                "n_symb = {n_symb} exceeds the {full} symbols of one frame"
            )));
        }
        Ok(Self {
            mu,
            n_rb,
            n_symb,
            carrier_hz: DEFAULT_CARRIER_HZ,
            c0: DEFAULT_C0,
            long_cp: true,
        })
    }

    /// FR2 n257 configuration: mu = 3, 264 RBs, one full 10 ms frame at 28 GHz.
    pub fn full_frame() -> Self {
        Self::new(3, 264, 1120).expect("static configuration")
    }

    /// 20 RBs (240 subcarriers) by 112 symbols, which still contains two long CPs.
    pub fn desk() -> Self {
        Self::new(3, 20, 112).expect("static configuration")
    }

    pub fn with_carrier(mut self, carrier_hz: f64) -> Self {
        self.carrier_hz = carrier_hz;
        self
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    /// Same numerology with every CP set to the normal length. Used to check
    /// that the exact-timing estimators degenerate to the uniform ones.
    pub fn without_long_cp(mut self) -> Self {
        self.long_cp = false;
        self
    }

    pub fn symbols_per_frame(mu: u32) -> usize {
        14 * 10 * (1usize << mu)
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }
    pub fn n_rb(&self) -> usize {
        self.n_rb
    }
    pub fn n_sc(&self) -> usize {
        12 * self.n_rb
    }
    pub fn n_symb(&self) -> usize {
        self.n_symb
    }
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn has_long_cp(&self) -> bool {
        self.long_cp
    }
    pub fn kappa(&self) -> u64 {
        KAPPA
    }
    pub fn t_c(&self) -> f64 {
        T_C
    }

    pub fn delta_f(&self) -> f64 {
        15e3 * f64::from(1u32 << self.mu)
    }

    /// Useful (FFT) part of a symbol, in `T_C` samples.
    pub fn n_u(&self) -> u64 {
        (2048 * KAPPA) >> self.mu
    }

    /// Long-CP period in symbols.
    pub fn eta(&self) -> usize {
        7 << self.mu
    }

    pub fn normal_cp(&self) -> u64 {
        (144 * KAPPA) >> self.mu
    }

    /// Extra samples carried by a long CP.
    pub fn long_cp_extra(&self) -> u64 {
        if self.long_cp {
            16 * KAPPA
        } else {
            0
        }
    }

    /// Duration of a normal-CP symbol in samples.
    pub fn normal_symbol_samples(&self) -> u64 {
        self.n_u() + self.normal_cp()
    }

    fn check_index(&self, l: usize) -> Result<()> {
        if l < self.n_symb {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "symbol",
                index: l,
                len: self.n_symb,
            })
        }
    }

    pub fn is_long_cp(&self, l: usize) -> bool {
        self.long_cp && l % self.eta() == 0
    }

    /// CP length of symbol `l` in `T_C` samples.
    pub fn cp_length(&self, l: usize) -> Result<u64> {
        self.check_index(l)?;
        Ok(self.cp_unchecked(l))
    }

    fn cp_unchecked(&self, l: usize) -> u64 {
        if self.is_long_cp(l) {
            self.normal_cp() + self.long_cp_extra()
        } else {
            self.normal_cp()
        }
    }

    /// Symbol length including CP, in samples.
    pub fn symbol_samples(&self, l: usize) -> Result<u64> {
        self.check_index(l)?;
        Ok(self.n_u() + self.cp_unchecked(l))
    }

    pub fn symbol_duration(&self, l: usize) -> Result<f64> {
        Ok(self.symbol_samples(l)? as f64 * T_C)
    }

    /// Number of long CPs among symbols `0..l`.
    fn long_cps_before(&self, l: usize) -> u64 {
        if self.long_cp {
            l.div_ceil(self.eta()) as u64
        } else {
            0
        }
    }

    /// Start of symbol `l` in samples from the frame start. `l == n_symb`
    /// is accepted and gives the total length of the modelled frame.
    pub fn start_sample(&self, l: usize) -> Result<u64> {
        if l > self.n_symb {
            return Err(Error::IndexOutOfRange {
                what: "symbol boundary",
                index: l,
                len: self.n_symb + 1,
            });
        }
        Ok(self.normal_symbol_samples() * l as u64 + self.long_cp_extra() * self.long_cps_before(l))
    }

    /// Length of the modelled frame in samples.
    pub fn frame_samples(&self) -> u64 {
        self.normal_symbol_samples() * self.n_symb as u64
            + self.long_cp_extra() * self.long_cps_before(self.n_symb)
    }

    pub fn t_frame(&self) -> f64 {
        self.frame_samples() as f64 * T_C
    }

    /// Cumulative time attached to symbol `l` under a CP-handling method.
    pub fn cumulative_time(&self, l: usize, method: CpMethod) -> Result<f64> {
        self.check_index(l)?;
        Ok(self.cumulative_unchecked(l, method))
    }

    fn cumulative_unchecked(&self, l: usize, method: CpMethod) -> f64 {
        match method {
            CpMethod::NormalOnly => (self.normal_symbol_samples() * l as u64) as f64 * T_C,
            CpMethod::FrameAverage => self.t_frame() * l as f64 / self.n_symb as f64,
            CpMethod::Exact => {
                let samples =
                    self.normal_symbol_samples() * l as u64 + self.long_cp_extra() * self.long_cps_before(l);
                samples as f64 * T_C
            }
        }
    }

    /// Cumulative times for the first `count` symbols.
    pub fn symbol_times(&self, count: usize, method: CpMethod) -> Result<Vec<f64>> {
        if count > self.n_symb {
            return Err(Error::IndexOutOfRange {
                what: "symbol count",
                index: count,
                len: self.n_symb,
            });
        }
        Ok((0..count).map(|l| self.cumulative_unchecked(l, method)).collect())
    }

    /// Uniform symbol spacing the method assumes. For `Exact` this is the
    /// normal-CP spacing, which is also the hop restored by removing the
    /// irregular rows in ESPRIT.
    pub fn nominal_spacing(&self, method: CpMethod) -> f64 {
        match method {
            CpMethod::NormalOnly | CpMethod::Exact => self.normal_symbol_samples() as f64 * T_C,
            CpMethod::FrameAverage => self.t_frame() / self.n_symb as f64,
        }
    }

    /// Extra phase accumulated by symbol `l` because of the long CPs.
    pub fn excess_phase(&self, doppler_hz: f64, l: usize) -> Result<f64> {
        self.check_index(l)?;
        let extra = (self.long_cp_extra() * self.long_cps_before(l)) as f64 * T_C;
        Ok(2.0 * PI * doppler_hz * extra)
    }

    /// Shortest CP in seconds; echoes must not be delayed beyond it.
    pub fn min_cp_duration(&self) -> f64 {
        self.normal_cp() as f64 * T_C
    }

    pub fn delay_from_distance(&self, distance_m: f64) -> f64 {
        2.0 * distance_m / self.c0
    }
    pub fn distance_from_delay(&self, delay_s: f64) -> f64 {
        self.c0 * delay_s / 2.0
    }
    pub fn doppler_from_velocity(&self, velocity_mps: f64) -> f64 {
        2.0 * velocity_mps * self.carrier_hz / self.c0
    }
    pub fn velocity_from_doppler(&self, doppler_hz: f64) -> f64 {
        doppler_hz * self.c0 / (2.0 * self.carrier_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Start times by the recursion t_start,l = t_start,l-1 + T_symb,l-1.
    fn recursive_starts(num: &Numerology) -> Vec<u64> {
        let mut starts = Vec::with_capacity(num.n_symb() + 1);
        let mut t = 0;
        starts.push(t);
        for l in 0..num.n_symb() {
            t += num.symbol_samples(l).unwrap();
            starts.push(t);
        }
        starts
    }

    #[test]
    fn cp_lengths_mu3() {
        let num = Numerology::full_frame();
        assert_eq!(num.cp_length(0).unwrap(), 2176);
        assert_eq!(num.cp_length(1).unwrap(), 1152);
        assert_eq!(num.cp_length(56).unwrap(), 2176);
        assert_eq!(num.cp_length(55).unwrap(), 1152);
        assert!(matches!(num.cp_length(1120), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn long_cp_positions_match_subframe_rule() {
        // within each subframe of 14 * 2^mu symbols: l = 0 or l = 7 * 2^mu
        for mu in 0..=3 {
            let num = Numerology::new(mu, 1, Numerology::symbols_per_frame(mu)).unwrap();
            let per_subframe = 14 << mu;
            for l in 0..num.n_symb() {
                let in_sub = l % per_subframe;
                let expected = in_sub == 0 || in_sub == 7 << mu;
                assert_eq!(num.is_long_cp(l), expected, "mu={mu} l={l}");
            }
        }
    }

    #[test]
    fn symbol_durations() {
        let num = Numerology::full_frame();
        assert_eq!(num.symbol_samples(1).unwrap(), 17536);
        assert_eq!(num.symbol_samples(0).unwrap(), 18560);
        assert!((num.symbol_duration(1).unwrap() - 8.919e-6).abs() < 1e-9);
        assert!((num.symbol_duration(0).unwrap() - 9.440e-6).abs() < 1e-9);
        let half_subframe: u64 = (0..56).map(|l| num.symbol_samples(l).unwrap()).sum();
        assert_eq!(half_subframe, 983_040);
        assert!((half_subframe as f64 * T_C - 0.5e-3).abs() < 1e-15);
    }

    #[test]
    fn frame_identity() {
        let num = Numerology::full_frame();
        assert_eq!(num.frame_samples(), 19_660_800);
        assert!((num.t_frame() - 10e-3).abs() < 1e-15);
        let longs = (0..num.n_symb()).filter(|&l| num.is_long_cp(l)).count();
        assert_eq!(longs, 20);
        assert_eq!(recursive_starts(&num)[1120], num.frame_samples());
    }

    #[test]
    fn closed_form_matches_recursion_for_all_mu() {
        for mu in 0..=3 {
            let num = Numerology::new(mu, 1, Numerology::symbols_per_frame(mu)).unwrap();
            let starts = recursive_starts(&num);
            for (l, &s) in starts.iter().enumerate() {
                assert_eq!(num.start_sample(l).unwrap(), s, "mu={mu} l={l}");
            }
            assert!((num.t_frame() - 10e-3).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_time_methods() {
        let num = Numerology::full_frame();
        let t1 = num.cumulative_time(1, CpMethod::NormalOnly).unwrap();
        assert!((t1 - 17536.0 * T_C).abs() < 1e-20);
        let t2 = num.cumulative_time(1, CpMethod::FrameAverage).unwrap();
        assert!((t2 - 10e-3 / 1120.0).abs() < 1e-18);
        assert!((t2 - 8.9286e-6).abs() < 1e-10);
        // symbols 0..55 contain one long CP
        let t56 = num.cumulative_time(56, CpMethod::Exact).unwrap();
        assert!((t56 - 983_040.0 * T_C).abs() < 1e-18);
        assert!(num.cumulative_time(1120, CpMethod::FrameAverage).is_err());
    }

    #[test]
    fn exact_minus_normal_is_staircase() {
        let num = Numerology::full_frame();
        let step = 1024.0 * T_C;
        for l in 0..num.n_symb() {
            let d = num.cumulative_time(l, CpMethod::Exact).unwrap()
                - num.cumulative_time(l, CpMethod::NormalOnly).unwrap();
            let k = (d / step).round();
            assert!((d - k * step).abs() < 1e-15);
            assert_eq!(k as usize, l.div_ceil(56));
        }
    }

    #[test]
    fn average_minus_normal_linear() {
        let num = Numerology::full_frame();
        let slope = num.nominal_spacing(CpMethod::FrameAverage) - num.nominal_spacing(CpMethod::NormalOnly);
        for l in [0, 1, 17, 560, 1119] {
            let d = num.cumulative_time(l, CpMethod::FrameAverage).unwrap()
                - num.cumulative_time(l, CpMethod::NormalOnly).unwrap();
            assert!((d - slope * l as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn excess_phase_values() {
        let num = Numerology::full_frame();
        assert_eq!(num.excess_phase(0.0, 700).unwrap(), 0.0);
        let q = num.excess_phase(12e3, 1119).unwrap();
        assert!((q - PI / 4.0).abs() < 1e-12);
        let e = num.excess_phase(6e3, 1119).unwrap();
        assert!((e - PI / 8.0).abs() < 1e-12);
        // step at each long-CP boundary
        let jump = num.excess_phase(12e3, 57).unwrap() - num.excess_phase(12e3, 56).unwrap();
        assert!((jump - 2.0 * PI * 12e3 * 1024.0 * T_C).abs() < 1e-12);
        assert!((jump - 0.0393).abs() < 1e-4);
    }

    #[test]
    fn unit_conversions() {
        let num = Numerology::full_frame();
        assert!((num.doppler_from_velocity(63.75) - 11_900.0).abs() < 1e-9);
        assert!((num.delay_from_distance(4.5) - 30e-9).abs() < 1e-18);
        assert!((num.velocity_from_doppler(num.doppler_from_velocity(12.3)) - 12.3).abs() < 1e-12);
    }

    #[test]
    fn disabling_long_cp() {
        let num = Numerology::full_frame().without_long_cp();
        for l in [0, 1, 56, 1119] {
            assert_eq!(
                num.cumulative_time(l, CpMethod::Exact).unwrap(),
                num.cumulative_time(l, CpMethod::NormalOnly).unwrap()
            );
        }
        assert_eq!(num.cp_length(0).unwrap(), 1152);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Numerology::new(3, 0, 10).is_err());
        assert!(Numerology::new(3, 10, 0).is_err());
        assert!(Numerology::new(3, 10, 1121).is_err());
        assert!(Numerology::new(7, 10, 10).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("iii".parse::<CpMethod>().unwrap(), CpMethod::Exact);
        assert_eq!("II".parse::<CpMethod>().unwrap(), CpMethod::FrameAverage);
        assert!("IV".parse::<CpMethod>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn excess_phase_monotone_and_piecewise_constant(f in 1.0f64..20e3, l in 1usize..1119) {
                let num = Numerology::full_frame();
                let a = num.excess_phase(f, l).unwrap();
                let b = num.excess_phase(f, l + 1).unwrap();
                prop_assert!(b >= a);
                if l % num.eta() != 0 {
                    prop_assert_eq!(a, b);
                }
            }
        }
    }
}
