//! Thin layer over `faer` for the dense complex kernels used here.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::error::{Error, Result};

pub use faer::c64;

pub type CMat = Mat<c64>;

/// All kernels run single-threaded so results are bit-reproducible; trial
/// level parallelism is handled by the harness.
pub(crate) const PAR: Par = Par::Seq;

pub(crate) fn cis(phase: f64) -> c64 {
    let (s, c) = phase.sin_cos();
    c64::new(c, s)
}

/// `alpha * a * b`, allocating the result.
pub(crate) fn product<A, B>(a: MatRef<'_, A>, b: MatRef<'_, B>, alpha: f64) -> CMat
where
    A: Conjugate<Canonical = c64>,
    B: Conjugate<Canonical = c64>,
{
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, c64::new(alpha, 0.0), PAR);
    out
}

pub(crate) fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Largest entry of `|M - M^H|`.
pub(crate) fn hermitian_asymmetry(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Self-adjoint eigendecomposition with eigenvalues sorted descending.
/// Column `i` of the returned matrix belongs to eigenvalue `i`.
pub(crate) fn hermitian_eigen(m: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order
    let values: Vec<f64> = (0..n).rev().map(|i| s[i].re).collect();
    let vectors = CMat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((values, vectors))
}

/// Eigenvalues of a small general complex matrix.
pub(crate) fn eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<c64>> {
    m.eigenvalues().map_err(|_| Error::EigenFailure)
}

/// Solve `A X = B` for Hermitian positive definite `A`.
pub(crate) fn solve_hpd(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<CMat> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|_| Error::DegenerateSubspace("normal-equation matrix is not positive definite".into()))?;
    Ok(llt.solve(b))
}
