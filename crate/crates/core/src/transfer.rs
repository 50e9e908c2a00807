//! Anti-periodic six-vertex transfer matrix and its spectrum.
//!
//! `T(λ) = tr₀[σˣ₀ R₀L(λ − μ_L) ⋯ R₀₁(λ − μ₁)]` acts on `(C²)^{⊗L}`; site `j`
//! is bit `j` of the basis index, bit value 0 meaning spin up. The same
//! monodromy also yields the domain-wall row operator used by
//! [`crate::oracle::z_contract`].

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{ModelParams, C64};

/// Largest `L` for which a dense `2^L × 2^L` transfer matrix is built.
pub const MAX_DENSE_L: usize = 10;
/// Largest acceptable 2-norm condition number of the eigenvector matrix.
pub const MAX_EIGVEC_CONDITION: f64 = 1e8;
/// Eigenvalues closer than this (relative to the spectral radius) count as
/// coincident.
pub const MIN_RELATIVE_GAP: f64 = 1e-8;
/// Default reference point for diagonalization.
pub const DEFAULT_REFERENCE: C64 = C64::new(0.4137, 0.2718);
const REFERENCE_SHIFT: C64 = C64::new(0.1173, -0.0731);
const REFERENCE_ATTEMPTS: usize = 8;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Applies the monodromy `R₀L(λ − μ_L) ⋯ R₀₁(λ − μ₁)` in place to a vector
/// on `aux ⊗ quantum`, stored as the two auxiliary components.
pub fn apply_monodromy(params: &ModelParams, lambda: C64, aux: &mut [Vec<C64>; 2]) {
    let c = params.c();
    let dim = aux[0].len();
    for (j, &mu) in params.mu().iter().enumerate() {
        let a = params.a(lambda - mu);
        let b = params.b(lambda - mu);
        let bit = 1usize << j;
        let [up, down] = aux;
        for s0 in (0..dim).filter(|s| s & bit == 0) {
            let s1 = s0 | bit;
            let (p, q) = (up[s1], down[s0]);
            up[s0] *= a;
            down[s1] *= a;
            up[s1] = b * p + c * q;
            down[s0] = c * p + b * q;
        }
    }
}

/// `T(λ) v` without forming the matrix.
pub fn apply_transfer(params: &ModelParams, lambda: C64, v: &[C64]) -> Vec<C64> {
    let zeros = vec![ZERO; v.len()];
    let mut from_up = [v.to_vec(), zeros.clone()];
    apply_monodromy(params, lambda, &mut from_up);
    let mut from_down = [zeros, v.to_vec()];
    apply_monodromy(params, lambda, &mut from_down);
    // the σˣ twist pairs incoming auxiliary state α with outgoing 1 − α
    from_up[1]
        .iter()
        .zip(&from_down[0])
        .map(|(x, y)| x + y)
        .collect()
}

/// Domain-wall row operator `B(λ)`: auxiliary space enters down, leaves up.
pub fn apply_row_operator(params: &ModelParams, lambda: C64, v: &[C64]) -> Vec<C64> {
    let mut aux = [vec![ZERO; v.len()], v.to_vec()];
    apply_monodromy(params, lambda, &mut aux);
    let [up, _] = aux;
    up
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub at_lambda: C64,
    pub matrix: CMatrix,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diagonal().iter().sum()
    }
}

pub fn build_transfer(params: &ModelParams, lambda: C64) -> Result<TransferMatrix> {
    let l = params.len();
    if l > MAX_DENSE_L {
        return Err(Error::SizeGuard { what: "dense transfer matrix", l, max: MAX_DENSE_L });
    }
    let dim = 1usize << l;
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut e = vec![ZERO; dim];
    for col in 0..dim {
        e[col] = C64::new(1.0, 0.0);
        let t = apply_transfer(params, lambda, &e);
        matrix.set_column(col, &nalgebra::DVector::from_vec(t));
        e[col] = ZERO;
    }
    Ok(TransferMatrix { at_lambda: lambda, matrix })
}

/// Eigendecomposition of `T(λ*)`, reused at every `λ` through the common
/// eigenbasis: `Λ_k(λ) = (V⁻¹ T(λ) V)_{kk}`.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    params: ModelParams,
    reference: C64,
    eigenvalues: Vec<C64>,
    vectors: CMatrix,
    inverse: CMatrix,
    condition: f64,
    leakage: f64,
}

impl SpectrumTable {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn reference_point(&self) -> C64 {
        self.reference
    }

    /// Eigenvalues at the reference point in branch order.
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn branch_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// 2-norm condition number of the eigenvector matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Largest off-diagonal entry of `V⁻¹ T(λ*) V` relative to the spectral radius.
    pub fn reference_leakage(&self) -> f64 {
        self.leakage
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    fn check_branch(&self, branch: usize) -> Result<()> {
        if branch >= self.branch_count() {
            return Err(Error::BranchOutOfRange { branch, count: self.branch_count() });
        }
        Ok(())
    }

    /// `Λ_k(λ)` with the relative off-diagonal leakage of column `k`.
    pub fn eigenvalue_at(&self, branch: usize, lambda: C64) -> Result<(C64, f64)> {
        self.check_branch(branch)?;
        let v: Vec<C64> = self.vectors.column(branch).iter().cloned().collect();
        let tv = nalgebra::DVector::from_vec(apply_transfer(&self.params, lambda, &v));
        let col = &self.inverse * tv;
        let value = col[branch];
        let off: f64 = col
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != branch)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        let scale = value.norm().max(f64::MIN_POSITIVE);
        Ok((value, off / scale))
    }

    /// `Λ_k(λ)` for every branch.
    pub fn eigenvalues_at(&self, lambda: C64) -> Vec<C64> {
        let n = self.branch_count();
        (0..n)
            .map(|k| {
                let v: Vec<C64> = self.vectors.column(k).iter().cloned().collect();
                let tv = apply_transfer(&self.params, lambda, &v);
                self.inverse.row(k).iter().zip(&tv).map(|(x, y)| x * y).sum()
            })
            .collect()
    }

    /// Per-branch eigenvalues at each of the given points, indexed `[branch][point]`.
    pub fn sample(&self, points: &[C64]) -> Vec<Vec<C64>> {
        let per_point: Vec<Vec<C64>> = points.iter().map(|&x| self.eigenvalues_at(x)).collect();
        (0..self.branch_count())
            .map(|k| per_point.iter().map(|row| row[k]).collect())
            .collect()
    }
}

/// Diagonalizes `T` at `reference`; fails with `DegenerateSpectrum` when the
/// eigenvector matrix is ill-conditioned or eigenvalues coincide.
pub fn diagonalize(params: &ModelParams, reference: C64) -> Result<SpectrumTable> {
    let t = build_transfer(params, reference)?;
    if !(linalg::frobenius(&t.matrix) > 1e-300) {
        return Err(Error::DegenerateSpectrum("transfer matrix vanishes at the reference point".into()));
    }
    let (vals, vecs) = linalg::eigen_decompose(&t.matrix).map_err(|e| match e {
        Error::NonFinite(_) => Error::DegenerateSpectrum("eigenvector back substitution overflowed".into()),
        e => e,
    })?;
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let gap = (vals[i] - vals[j]).norm() / scale;
            if gap < MIN_RELATIVE_GAP {
                return Err(Error::DegenerateSpectrum(format!(
                    "eigenvalues {i} and {j} coincide (relative gap {gap:.2e})"
                )));
            }
        }
    }

    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| branch_order(vals[i], vals[j], scale));
    let eigenvalues: Vec<C64> = order.iter().map(|&k| vals[k]).collect();
    let vectors = CMatrix::from_fn(vecs.nrows(), order.len(), |r, c| vecs[(r, order[c])]);

    let condition = linalg::condition_2norm(&vectors);
    if !(condition <= MAX_EIGVEC_CONDITION) {
        return Err(Error::DegenerateSpectrum(format!(
            "eigenvector condition number {condition:.3e} exceeds {MAX_EIGVEC_CONDITION:.0e}"
        )));
    }
    let inverse = vectors
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateSpectrum("eigenvector matrix is singular".into()))?;

    let diag = &inverse * &t.matrix * &vectors;
    let mut leakage = 0.0f64;
    for i in 0..diag.nrows() {
        for j in 0..diag.ncols() {
            if i != j {
                leakage = leakage.max(diag[(i, j)].norm() / scale);
            }
        }
    }

    Ok(SpectrumTable {
        params: params.clone(),
        reference,
        eigenvalues,
        vectors,
        inverse,
        condition,
        leakage,
    })
}

/// Diagonalizes at [`DEFAULT_REFERENCE`], shifting the reference point a few
/// times if the spectrum there is degenerate.
pub fn diagonalize_default(params: &ModelParams) -> Result<SpectrumTable> {
    let mut last = None;
    for attempt in 0..REFERENCE_ATTEMPTS {
        let reference = DEFAULT_REFERENCE + REFERENCE_SHIFT * attempt as f64;
        match diagonalize(params, reference) {
            Ok(table) => return Ok(table),
            Err(e @ Error::DegenerateSpectrum(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Descending modulus; equal moduli (to relative 1e-9) fall back to
/// descending real part, then descending imaginary part.
fn branch_order(x: C64, y: C64, scale: f64) -> std::cmp::Ordering {
    let tol = 1e-9 * scale;
    let (nx, ny) = (x.norm(), y.norm());
    if (nx - ny).abs() > tol {
        return ny.partial_cmp(&nx).unwrap();
    }
    if (x.re - y.re).abs() > tol {
        return y.re.partial_cmp(&x.re).unwrap();
    }
    y.im.partial_cmp(&x.im).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params(l: usize) -> ModelParams {
        let mu = (0..l).map(|k| c(0.31 * k as f64 - 0.4, 0.07 * k as f64)).collect();
        ModelParams::new(c(0.55, 0.12), mu).unwrap()
    }

    #[test]
    fn single_site_is_twist_times_c() {
        let p = params(1);
        for lam in [c(0.0, 0.0), c(0.7, -0.3)] {
            let t = build_transfer(&p, lam).unwrap();
            let cw = p.c();
            assert!((t.matrix[(0, 1)] - cw).norm() < 1e-15);
            assert!((t.matrix[(1, 0)] - cw).norm() < 1e-15);
            assert_eq!(t.trace(), c(0.0, 0.0));
        }
        let table = diagonalize_default(&p).unwrap();
        let e = table.eigenvalues();
        assert_eq!(e.len(), 2);
        let cw = p.c();
        assert!(e.iter().any(|z| (z - cw).norm() < 1e-14));
        assert!(e.iter().any(|z| (z + cw).norm() < 1e-14));
    }

    #[test]
    fn eigenvalue_at_reference_matches_table() {
        let p = params(3);
        let table = diagonalize_default(&p).unwrap();
        for k in 0..table.branch_count() {
            let (v, leak) = table.eigenvalue_at(k, table.reference_point()).unwrap();
            assert!((v - table.eigenvalues()[k]).norm() < 1e-10 * v.norm());
            assert!(leak < 1e-9);
        }
        assert!(matches!(
            table.eigenvalue_at(8, c(0.0, 0.0)),
            Err(Error::BranchOutOfRange { branch: 8, count: 8 })
        ));
    }

    #[test]
    fn branches_sorted_by_modulus() {
        let table = diagonalize_default(&params(4)).unwrap();
        let e = table.eigenvalues();
        assert!(e.windows(2).all(|w| w[0].norm() >= w[1].norm() - 1e-9 * e[0].norm()));
    }

    #[test]
    fn zero_anisotropy_is_degenerate() {
        let mu = vec![c(0.1, 0.0), c(-0.3, 0.2)];
        let p = ModelParams::new(c(0.0, 0.0), mu).unwrap();
        assert!(matches!(diagonalize_default(&p), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn dense_guard() {
        let mu = (0..11).map(|k| c(0.1 * k as f64, 0.0)).collect();
        let p = ModelParams::new(c(0.5, 0.0), mu).unwrap();
        assert!(matches!(build_transfer(&p, c(0.0, 0.0)), Err(Error::SizeGuard { .. })));
    }
}
