//! Subspace estimators: smoothing, covariances, eigensplit, MUSIC, ESPRIT.

pub mod covariance;
pub mod eigen;
pub mod esprit;
pub mod mssp;
pub mod music;

pub use covariance::{delay_covariance, doppler_covariance};
pub use eigen::{eig_split, EigenSplit};
pub use esprit::{esprit, rotation_eigenvalues, shift_pairs};
pub use mssp::{mssp, window_length, SmoothedMatrix};
pub use music::{music_search, music_spectrum, MusicEstimate, MusicOptions, SteeringVector};

use crate::error::{Error, Result};
use crate::numerology::{CpMethod, Numerology};
use crate::spectrum::Axis;
use crate::waveform::RadarDataMatrix;

pub const DEFAULT_RHO: f64 = 0.4;

/// Symbol-domain covariance split into `p` signal dimensions.
pub fn doppler_split(y: &RadarDataMatrix, p: usize) -> Result<EigenSplit> {
    eig_split(&doppler_covariance(y)?, p, Axis::Doppler)
}

/// Smoothed subcarrier covariance split into `p` signal dimensions.
pub fn delay_split(y: &RadarDataMatrix, p: usize, rho: f64, forward_backward: bool) -> Result<EigenSplit> {
    let smoothed = mssp(y, rho)?.with_forward_backward(forward_backward);
    if smoothed.l_prime() <= p {
        return Err(Error::InvalidParameter(format!(
            "smoothing window {} must exceed the model order {p}",
            smoothed.l_prime()
        )));
    }
    eig_split(&delay_covariance(&smoothed)?, p, Axis::Delay)
}

/// Doppler resolution cell `1 / (L T)` of an `L`-symbol observation.
pub fn doppler_rayleigh(num: &Numerology, n_symbols: usize, method: CpMethod) -> f64 {
    1.0 / (n_symbols as f64 * num.nominal_spacing(method))
}

/// Delay resolution cell `1 / (K delta_f)` of a `K`-subcarrier band.
pub fn delay_rayleigh(num: &Numerology, n_subcarriers: usize) -> f64 {
    1.0 / (n_subcarriers as f64 * num.delta_f())
}
