//! The block-tridiagonal matrix `H_L` and the representation
//! `Z(λ₀, …, λ_{L−1}) = κ₀ det(H_L)`.
//!
//! Unknowns are the values `F_{L−m}` at the argument sets of level
//! `m = L, L−1, …, 2`: for even `m` the arguments are `{0..L−1}` minus `m`
//! indices, for odd `m` they are `{1..L−1}` minus `m − 1` indices. Within a
//! level the variables follow the lexicographic order of the removed tuple.
//!
//! Each row is one instance of the functional equation
//! `Λ(λ₀) F_n(λ₁..λ_n) = F_{n+1}(λ₀..λ_n) + Σ M_i F_{n−1} + Σ N_{j,i} F_{n−1}`,
//! with the smallest index of the argument set playing `λ₀`. The last row
//! merges the `n = L − 1` equation with the `n = L − 2` equation at shifted
//! arguments, eliminating `F_{L−1}(λ₁..λ_{L−1})`.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{coeff_m, coeff_n};
use crate::linalg::{self, CMatrix};
use crate::model::{ModelParams, SpectralPoints, C64};
use crate::subset::{binomial, GroundSet, IndexSubset};
use crate::transfer::SpectrumTable;

/// One level of unknowns, all `F_{L−m}` of a fixed `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub m: usize,
    pub ground: GroundSet,
    pub removed_size: usize,
    pub offset: usize,
    pub subsets: Vec<IndexSubset>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn columns(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Order `n` of the functions at this level.
    pub fn order(&self, l: usize) -> usize {
        l - self.m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableLayout {
    l: usize,
    levels: Vec<Level>,
}

/// `3 · 2^{L−2} − 2`
pub fn h_dimension(l: usize) -> usize {
    3 * (1usize << (l - 2)) - 2
}

pub fn build_layout(l: usize) -> Result<VariableLayout> {
    if l < 3 {
        return Err(Error::Precondition(format!(
            "H_L is defined for L >= 3 (got {l}); L = 2 uses the 2x2 formula"
        )));
    }
    let mut levels = Vec::with_capacity(l - 1);
    let mut offset = 0;
    for m in (2..=l).rev() {
        let (ground, removed_size) = if m % 2 == 0 { (GroundSet::Full, m) } else { (GroundSet::Tail, m - 1) };
        let subsets = IndexSubset::all(ground, l, removed_size);
        let len = subsets.len();
        levels.push(Level { m, ground, removed_size, offset, subsets });
        offset += len;
    }
    Ok(VariableLayout { l, levels })
}

impl VariableLayout {
    pub fn lattice_len(&self) -> usize {
        self.l
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(Level::len).sum()
    }

    pub fn level(&self, m: usize) -> Option<&Level> {
        self.levels.iter().find(|lv| lv.m == m)
    }

    /// Argument index sets of all unknowns, in column order.
    pub fn arguments(&self) -> Vec<Vec<usize>> {
        self.levels
            .iter()
            .flat_map(|lv| lv.subsets.iter().map(|s| s.complement(self.l)))
            .collect()
    }

    /// Column of the unknown `F_n` evaluated on the sorted index set `args`.
    pub fn column_of(&self, args: &[usize]) -> Result<usize> {
        let m = self.l.checked_sub(args.len()).filter(|&m| m >= 2).ok_or_else(|| {
            Error::Precondition(format!("no unknown with {} arguments", args.len()))
        })?;
        let level = self.level(m).unwrap();
        let removed: Vec<usize> = level.ground.indices(self.l).filter(|i| !args.contains(i)).collect();
        if removed.len() != level.removed_size {
            return Err(Error::Precondition(format!("argument set {args:?} is not a level-{m} unknown")));
        }
        let subset = IndexSubset::new(level.ground, removed, self.l)?;
        Ok(level.offset + subset.rank())
    }

    /// Rows of block row `m` (`m = L..2`).
    pub fn block_rows(&self, m: usize) -> Range<usize> {
        let rows = |m: usize| if m == 2 { 1 } else { self.level(m - 1).map_or(0, Level::len) };
        let start: usize = (m + 1..=self.l).map(rows).sum();
        start..start + rows(m)
    }

    /// `[m]`: number of rows of block row `m ≥ 3`.
    pub fn block_size(&self, m: usize) -> usize {
        let l = self.l;
        if m.is_multiple_of(2) {
            binomial(l - 1, m - 2)
        } else {
            binomial(l, m - 1)
        }
    }
}

/// `{m; k} = (L−k)! / ((m−k)! (L−m)!)`
pub fn identity_block_size(l: usize, m: usize, k: usize) -> usize {
    binomial(l - k, m - k)
}

/// One contribution `coeff · ∏ Λ(λ_f)` to entry `(row, col)`.
#[derive(Debug, Clone, Copy)]
struct Term {
    row: usize,
    col: usize,
    coeff: C64,
    factors: [Option<usize>; 2],
}

/// Branch-independent part of `H_L`: all kernel values and the positions of
/// the eigenvalue entries.
#[derive(Debug, Clone)]
pub struct HTemplate {
    layout: VariableLayout,
    terms: Vec<Term>,
}

impl HTemplate {
    pub fn new(params: &ModelParams, points: &SpectralPoints) -> Result<Self> {
        let l = params.len();
        if points.len() != l {
            return Err(Error::InvalidParams("spectral point count mismatch".into()));
        }
        let layout = build_layout(l)?;
        let lam = points.values();
        let mut terms = Vec::new();
        let one = C64::new(1.0, 0.0);

        let mut row = 0;
        for m in (3..=l).rev() {
            let n = l - m;
            let rows_level = layout.level(m - 1).unwrap().clone();
            for subset in &rows_level.subsets {
                let s = subset.complement(l);
                let col = |idx: Vec<usize>| layout.column_of(&idx);
                terms.push(Term { row, col: col(s[1..].to_vec())?, coeff: one, factors: [Some(s[0]), None] });
                terms.push(Term { row, col: col(s.clone())?, coeff: -one, factors: [None, None] });
                push_kernel_terms(params, &layout, lam, &s, n, row, -one, None, &mut terms)?;
                row += 1;
            }
        }

        // merged final row
        let all: Vec<usize> = (0..l).collect();
        terms.push(Term {
            row,
            col: layout.column_of(&all[2..])?,
            coeff: one,
            factors: [Some(0), Some(1)],
        });
        push_kernel_terms(params, &layout, lam, &all, l - 1, row, -one, None, &mut terms)?;
        push_kernel_terms(params, &layout, lam, &all[1..], l - 2, row, -one, Some(0), &mut terms)?;

        Ok(HTemplate { layout, terms })
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    /// Assembles `H_L` from the branch eigenvalues `Λ(λ₀), …, Λ(λ_{L−1})`.
    pub fn matrix(&self, eigenvalues: &[C64]) -> CMatrix {
        let dim = self.layout.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let mut v = t.coeff;
            for f in t.factors.iter().flatten() {
                v *= eigenvalues[*f];
            }
            h[(t.row, t.col)] += v;
        }
        h
    }
}

/// Adds `coeff · [Λ(λ_prefactor)] · (M/N)` terms of the order-`n` equation on
/// the index set `s` (first element plays `λ₀`).
#[allow(clippy::too_many_arguments)]
fn push_kernel_terms(
    params: &ModelParams,
    layout: &VariableLayout,
    lam: &[C64],
    s: &[usize],
    n: usize,
    row: usize,
    coeff: C64,
    prefactor: Option<usize>,
    terms: &mut Vec<Term>,
) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let args: Vec<C64> = s.iter().map(|&k| lam[k]).collect();
    let without = |skip: &[usize]| -> Vec<usize> {
        s.iter().enumerate().filter(|(p, _)| !skip.contains(p)).map(|(_, &k)| k).collect()
    };
    for i in 1..=n {
        let v = coeff_m(params, n, i, &args)?;
        terms.push(Term { row, col: layout.column_of(&without(&[0, i]))?, coeff: coeff * v, factors: [prefactor, None] });
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let v = coeff_n(params, n, j, i, &args)?;
            terms.push(Term { row, col: layout.column_of(&without(&[i, j]))?, coeff: coeff * v, factors: [prefactor, None] });
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct HMatrix {
    pub matrix: CMatrix,
    pub branch: usize,
    pub layout: VariableLayout,
    /// 1-norm condition number.
    pub condition: f64,
}

pub fn build_h(params: &ModelParams, points: &SpectralPoints, spectrum: &SpectrumTable, branch: usize) -> Result<HMatrix> {
    if branch >= spectrum.branch_count() {
        return Err(Error::BranchOutOfRange { branch, count: spectrum.branch_count() });
    }
    let template = HTemplate::new(params, points)?;
    let eig: Vec<C64> = points.values().iter().map(|&x| spectrum.eigenvalue_at(branch, x).map(|(v, _)| v)).collect::<Result<_>>()?;
    let matrix = template.matrix(&eig);
    let condition = linalg::condition_1norm(&matrix);
    Ok(HMatrix { matrix, branch, layout: template.layout, condition })
}

/// Smallest `|Λ(μ_i)|` accepted, relative to the spectral radius at the reference point.
pub const EIGENVALUE_ZERO_TOL: f64 = 1e-12;

/// `κ₀ = c^L ∏_{i<j} a(μ_i−μ_j) a(μ_j−μ_i) / ∏_i Λ(μ_i)`
pub fn kappa0(params: &ModelParams, spectrum: &SpectrumTable, branch: usize) -> Result<C64> {
    if branch >= spectrum.branch_count() {
        return Err(Error::BranchOutOfRange { branch, count: spectrum.branch_count() });
    }
    let at_mu: Vec<C64> = params.mu().iter().map(|&m| spectrum.eigenvalue_at(branch, m).map(|(v, _)| v)).collect::<Result<_>>()?;
    kappa0_from_values(params, spectrum, branch, &at_mu)
}

fn kappa0_from_values(params: &ModelParams, spectrum: &SpectrumTable, branch: usize, at_mu: &[C64]) -> Result<C64> {
    let scale = spectrum.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut denominator = C64::new(1.0, 0.0);
    for (index, v) in at_mu.iter().enumerate() {
        if !(v.norm() > EIGENVALUE_ZERO_TOL * scale) {
            return Err(Error::EigenvalueZeroAtMu { branch, index });
        }
        denominator *= v;
    }
    Ok(crate::oracle::diagonal_value(params) / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralZ {
    pub branch: usize,
    pub kappa0: C64,
    pub det_h: C64,
    pub z: C64,
    pub condition: f64,
}

fn l2_matrix(params: &ModelParams, points: &SpectralPoints, eig: &[C64]) -> Result<CMatrix> {
    let lam = points.values();
    let m = coeff_m(params, 1, 1, lam)?;
    Ok(CMatrix::from_row_slice(2, 2, &[eig[1], C64::new(1.0, 0.0), m, eig[0]]))
}

/// `κ₀ det(H_L)` for one branch; for `L = 2` the 2×2 determinant
/// `det[[Λ(λ₁), 1], [M₁^{(1)}(λ₀, λ₁), Λ(λ₀)]]`.
pub fn z_spectral(params: &ModelParams, points: &SpectralPoints, spectrum: &SpectrumTable, branch: usize) -> Result<SpectralZ> {
    if branch >= spectrum.branch_count() {
        return Err(Error::BranchOutOfRange { branch, count: spectrum.branch_count() });
    }
    let l = params.len();
    if l < 2 {
        return Err(Error::Precondition("spectral determinant needs L >= 2".into()));
    }
    let kappa = kappa0(params, spectrum, branch)?;
    let matrix = if l == 2 {
        let eig: Vec<C64> = points.values().iter().map(|&x| spectrum.eigenvalue_at(branch, x).map(|(v, _)| v)).collect::<Result<_>>()?;
        l2_matrix(params, points, &eig)?
    } else {
        build_h(params, points, spectrum, branch)?.matrix
    };
    Ok(finish(branch, kappa, &matrix))
}

/// Above this 1-norm condition the double-precision LU is replaced by
/// [`linalg::determinant_extended`].
pub const EXTENDED_DET_CONDITION: f64 = 1e6;

fn finish(branch: usize, kappa0: C64, matrix: &CMatrix) -> SpectralZ {
    let condition = linalg::condition_1norm(matrix);
    let det_h = if condition > EXTENDED_DET_CONDITION {
        linalg::determinant_extended(matrix)
    } else {
        linalg::determinant(matrix)
    };
    SpectralZ { branch, kappa0, det_h, z: kappa0 * det_h, condition }
}

/// [`z_spectral`] for every branch, sharing kernel evaluations and eigenvalue samples.
pub fn z_spectral_all(params: &ModelParams, points: &SpectralPoints, spectrum: &SpectrumTable) -> Result<Vec<SpectralZ>> {
    let l = params.len();
    if l < 2 {
        return Err(Error::Precondition("spectral determinant needs L >= 2".into()));
    }
    if points.len() != l {
        return Err(Error::InvalidParams("spectral point count mismatch".into()));
    }
    let at_lambda = spectrum.sample(points.values());
    let at_mu = spectrum.sample(params.mu());
    let template = if l >= 3 { Some(HTemplate::new(params, points)?) } else { None };
    (0..spectrum.branch_count())
        .into_par_iter()
        .map(|k| {
            let kappa = kappa0_from_values(params, spectrum, k, &at_mu[k])?;
            let matrix = match &template {
                Some(t) => t.matrix(&at_lambda[k]),
                None => l2_matrix(params, points, &at_lambda[k])?,
            };
            Ok(finish(k, kappa, &matrix))
        })
        .collect()
}

/// Largest pairwise `|Z_k − Z_k'|` over the branches, relative to the median modulus.
pub fn branch_invariance(values: &[C64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = moduli[moduli.len() / 2];
    let mut worst = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            worst = worst.max((values[i] - values[j]).norm());
        }
    }
    worst / median
}
