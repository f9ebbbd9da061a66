//! Sample covariances along the symbol and subcarrier axes.

use crate::error::{Error, Result};
use crate::linalg::{product, CMat};
use crate::waveform::RadarDataMatrix;

use super::mssp::SmoothedMatrix;

/// `L x L` symbol-domain covariance `sum_k y_k y_k^H / K`, with `y_k` the
/// `k`-th subcarrier row taken as a column vector. Its signal subspace is
/// spanned by the Doppler steering vectors `exp(j 2 pi f T_l)`.
pub fn doppler_covariance(y: &RadarDataMatrix) -> Result<CMat> {
    let k = y.n_subcarriers();
    if k == 0 || y.n_symbols() == 0 {
        return Err(Error::EmptyInput("radar data matrix"));
    }
    Ok(product(y.data.transpose(), y.data.conjugate(), 1.0 / k as f64))
}

/// `L' x L'` covariance of the smoothed subcarrier windows.
pub fn delay_covariance(smoothed: &SmoothedMatrix<'_>) -> Result<CMat> {
    let (rows, cols) = smoothed.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput("smoothed matrix"));
    }
    Ok(smoothed.covariance())
}
