use crate::error::{Error, Result};
use crate::linalg::{hermitian_asymmetry, hermitian_eigen, max_abs, CMat};
use crate::spectrum::Axis;

/// Relative asymmetry above which a covariance is rejected.
const HERMITIAN_TOL: f64 = 1e-9;

/// Signal/noise partition of a covariance eigendecomposition.
#[derive(Debug, Clone)]
pub struct EigenSplit {
    pub axis: Axis,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `dim x P`.
    pub signal_basis: CMat,
    /// `dim x (dim - P)`.
    pub noise_basis: CMat,
}

impl EigenSplit {
    pub fn dim(&self) -> usize {
        self.signal_basis.nrows()
    }

    pub fn order(&self) -> usize {
        self.signal_basis.ncols()
    }
}

pub fn eig_split(r: &CMat, p: usize, axis: Axis) -> Result<EigenSplit> {
    let n = r.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("covariance"));
    }
    if r.ncols() != n {
        return Err(Error::DimensionMismatch(format!("covariance is {}x{}", n, r.ncols())));
    }
    if p == 0 {
        return Err(Error::ZeroDimension("model order"));
    }
    if p >= n {
        return Err(Error::InvalidParameter(format!("model order {p} must be below the dimension {n}")));
    }
    let asym = hermitian_asymmetry(r.as_ref());
    if asym > HERMITIAN_TOL * max_abs(r.as_ref()).max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian { asymmetry: asym });
    }
    let (eigenvalues, vectors) = hermitian_eigen(r.as_ref())?;
    Ok(EigenSplit {
        axis,
        eigenvalues,
        signal_basis: vectors.subcols(0, p).to_owned(),
        noise_basis: vectors.subcols(p, n - p).to_owned(),
    })
}
