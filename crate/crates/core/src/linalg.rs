//! Dense complex linear algebra: determinants, condition estimates and the
//! non-Hermitian eigendecomposition used for the transfer-matrix spectrum.
//!
//! Factorizations come from `nalgebra` (partial-pivoting LU, complex Schur,
//! SVD); eigenvectors are recovered from the Schur form by back substitution.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};
use crate::model::C64;

pub type CMatrix = DMatrix<C64>;

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &CMatrix) -> C64 {
    m.clone().lu().determinant()
}

/// Determinant with partial-pivoting elimination carried out at 192 bits on
/// the double-precision entries.
pub fn determinant_extended(m: &CMatrix) -> C64 {
    crate::wide::determinant_of(m)
}

/// 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`; infinite for singular input.
pub fn condition_1norm(m: &CMatrix) -> f64 {
    match m.clone().lu().try_inverse() {
        Some(inv) => one_norm(m) * one_norm(&inv),
        None => f64::INFINITY,
    }
}

pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// 2-norm condition number from singular values.
pub fn condition_2norm(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues and unit-norm right eigenvectors (as columns) of a general
/// complex matrix. Assumes distinct eigenvalues; near-coincident ones give
/// ill-conditioned eigenvectors, which callers detect through the
/// condition number of the returned matrix.
pub fn eigen_decompose(m: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParams("eigendecomposition needs a square matrix".into()));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| Error::DegenerateSpectrum("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let small = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lk = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut d = t[(j, j)] - lk;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(j, k)] = -s / d;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col /= C64::new(norm, 0.0);
        }
    }
    if v.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("eigenvectors"));
    }
    Ok((eigenvalues, v))
}
