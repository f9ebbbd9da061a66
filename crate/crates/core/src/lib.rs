//! Delay and Doppler estimation on 5G NR OFDM frames with uneven cyclic
//! prefixes: waveform and echo simulation, periodogram, MUSIC and ESPRIT
//! estimators, and a Monte Carlo harness.

pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod numerology;
pub mod periodogram;
pub mod spectrum;
pub mod subspace;
pub mod waveform;

pub use channel::{add_awgn, apply_time_domain, synthesize_symbol_domain, NoiseSpec, Target, TargetSet};
pub use error::{Error, Result};
pub use linalg::{c64, CMat};
pub use numerology::{CpMethod, Numerology};
pub use periodogram::{delay_periodogram, doppler_periodogram};
pub use spectrum::{find_peaks, Axis, Peak, PeakList, Spectrum};
pub use subspace::{covariance::delay_covariance, covariance::doppler_covariance, eig_split, esprit, mssp, music_spectrum};
pub use waveform::{
    build_radar_matrix, demodulate_frame, generate_payload, modulate_frame, Constellation, RadarDataMatrix,
    ResourceGrid, SampleStream,
};
