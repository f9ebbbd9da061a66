//! Hankel smoothing across subcarriers.

use crate::error::{Error, Result};
use crate::linalg::{c64, product, CMat};
use crate::waveform::RadarDataMatrix;

/// Smoothed data `Y^ = [Y~_0 .. Y~_{N_sub-1}]` where block `j` is rows
/// `j .. j + L'` of the radar matrix. The blocks are never copied; entries
/// and the covariance are computed from the source matrix.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedMatrix<'a> {
    source: &'a RadarDataMatrix,
    l_prime: usize,
    n_sub: usize,
    rho: f64,
    forward_backward: bool,
}

/// Window length `floor(rho * K)` and the resulting block count.
pub fn window_length(k: usize, rho: f64) -> Result<(usize, usize)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("smoothing constant {rho} outside (0, 1)")));
    }
    let l_prime = (rho * k as f64).floor() as usize;
    if l_prime == 0 {
        return Err(Error::ZeroDimension("smoothing window"));
    }
    if l_prime > k {
        return Err(Error::DimensionMismatch(format!("window {l_prime} longer than {k} subcarriers")));
    }
    Ok((l_prime, k - l_prime + 1))
}

pub fn mssp(y: &RadarDataMatrix, rho: f64) -> Result<SmoothedMatrix<'_>> {
    let (l_prime, n_sub) = window_length(y.n_subcarriers(), rho)?;
    Ok(SmoothedMatrix {
        source: y,
        l_prime,
        n_sub,
        rho,
        forward_backward: false,
    })
}

impl<'a> SmoothedMatrix<'a> {
    /// Also average with the flipped, conjugated covariance.
    pub fn with_forward_backward(mut self, enabled: bool) -> Self {
        self.forward_backward = enabled;
        self
    }

    pub fn l_prime(&self) -> usize {
        self.l_prime
    }
    pub fn n_sub(&self) -> usize {
        self.n_sub
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn forward_backward(&self) -> bool {
        self.forward_backward
    }
    pub fn source(&self) -> &'a RadarDataMatrix {
        self.source
    }

    /// `(L', N_sub * L)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.l_prime, self.n_sub * self.source.n_symbols())
    }

    /// Entry `(i, j * L + m)` of the smoothed matrix, i.e. `Y~(i + j, m)`.
    pub fn entry(&self, row: usize, col: usize) -> c64 {
        let l = self.source.n_symbols();
        let (j, m) = (col / l, col % l);
        self.source.data[(row + j, m)]
    }

    /// Explicit `L' x (N_sub * L)` matrix. Only sensible for small inputs.
    pub fn materialize(&self) -> CMat {
        let (r, c) = self.shape();
        CMat::from_fn(r, c, |i, j| self.entry(i, j))
    }

    /// `Y^ Y^^H / (N_sub * L)`.
    ///
    /// Uses `R(i, i') = sum_s G(i + s, i' + s) / (N_sub L)` with the
    /// subcarrier Gram matrix `G = Y~ Y~^H`, sliding each diagonal sum.
    pub fn covariance(&self) -> CMat {
        let y = &self.source.data;
        let g = product(y.as_ref(), y.adjoint(), 1.0);
        let (lp, ns) = (self.l_prime, self.n_sub);
        let scale = 1.0 / (ns * self.source.n_symbols()) as f64;
        let mut r = CMat::zeros(lp, lp);
        for d in 0..lp {
            let mut acc: c64 = (0..ns).map(|s| g[(s, s + d)]).sum();
            r[(0, d)] = acc * scale;
            for i in 1..lp - d {
                acc += g[(i - 1 + ns, i - 1 + ns + d)] - g[(i - 1, i - 1 + d)];
                r[(i, i + d)] = acc * scale;
            }
        }
        for j in 0..lp {
            for i in j + 1..lp {
                r[(i, j)] = r[(j, i)].conj();
            }
        }
        if self.forward_backward {
            let flipped = CMat::from_fn(lp, lp, |i, j| r[(lp - 1 - i, lp - 1 - j)].conj());
            r = CMat::from_fn(lp, lp, |i, j| (r[(i, j)] + flipped[(i, j)]) * 0.5);
        }
        r
    }
}
