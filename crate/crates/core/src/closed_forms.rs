//! Closed-form reference values for small lattices: partition functions for
//! `L = 2` and for `L = 3` with vanishing inhomogeneities, and the full
//! transfer-matrix spectra for the same cases together with the sign of `κ₀`
//! on each branch.

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpectralPoints, C64};

/// `Z = c² [b(λ₀−μ₀) b(λ₁−μ₁) + a(λ₀−μ₁) a(λ₁−μ₀)]`
pub fn z_l2(params: &ModelParams, points: &SpectralPoints) -> Result<C64> {
    if params.len() != 2 || points.len() != 2 {
        return Err(Error::Precondition("L = 2 closed form".into()));
    }
    let (l, m) = (points.values(), params.mu());
    let c = params.c();
    Ok(c * c * (params.b(l[0] - m[0]) * params.b(l[1] - m[1]) + params.a(l[0] - m[1]) * params.a(l[1] - m[0])))
}

/// Seven-term expansion of `Z` for `L = 3`, `μ_j = 0`.
pub fn z_l3_uniform(params: &ModelParams, points: &SpectralPoints) -> Result<C64> {
    if params.len() != 3 || points.len() != 3 || params.mu().iter().any(|m| m.norm() != 0.0) {
        return Err(Error::Precondition("L = 3 closed form needs mu = 0".into()));
    }
    let c = params.c();
    let a: Vec<C64> = points.values().iter().map(|&x| params.a(x)).collect();
    let b: Vec<C64> = points.values().iter().map(|&x| params.b(x)).collect();
    let sq = |z: C64| z * z;
    let bracket = c * c * a[0] * a[2] * b[0] * b[2]
        + a[0] * a[1] * b[0] * b[1] * sq(b[2])
        + a[0] * a[1] * sq(a[2]) * b[0] * b[1]
        + a[1] * a[2] * sq(b[0]) * b[1] * b[2]
        + sq(a[0]) * a[1] * a[2] * b[1] * b[2]
        + sq(a[0]) * sq(a[1]) * sq(a[2])
        + sq(b[0]) * sq(b[1]) * sq(b[2]);
    Ok(c * c * c * bracket)
}

/// A closed-form eigenvalue with the `κ₀` of its branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub kappa0: f64,
    pub eigenvalue: C64,
}

/// The four eigenvalues for `L = 2` at `λ`.
pub fn spectrum_l2(params: &ModelParams, lambda: C64) -> Result<[TableEntry; 4]> {
    if params.len() != 2 {
        return Err(Error::Precondition("L = 2 spectrum".into()));
    }
    let g = params.gamma();
    let (m1, m2) = (params.mu()[0], params.mu()[1]);
    let i = C64::new(0.0, 1.0);
    let half = (g - m1 - m2 + 2.0 * lambda) / 2.0;
    let s2 = 2f64.sqrt();
    let even = s2 * g.sinh() * (g.cosh() + (m1 - m2).cosh()).sqrt() * half.sinh();
    let odd = i * s2 * g.sinh() * (g.cosh() - (m1 - m2).cosh()).sqrt() * half.cosh();
    Ok([
        TableEntry { kappa0: 1.0, eigenvalue: even },
        TableEntry { kappa0: 1.0, eigenvalue: -even },
        TableEntry { kappa0: -1.0, eigenvalue: odd },
        TableEntry { kappa0: -1.0, eigenvalue: -odd },
    ])
}

/// The eight eigenvalues for `L = 3`, `μ_j = 0`, at `λ`.
pub fn spectrum_l3_uniform(params: &ModelParams, lambda: C64) -> Result<[TableEntry; 8]> {
    if params.len() != 3 || params.mu().iter().any(|m| m.norm() != 0.0) {
        return Err(Error::Precondition("L = 3 spectrum needs mu = 0".into()));
    }
    let g = params.gamma();
    let x = lambda;
    let i = C64::new(0.0, 1.0);
    let r3 = 3f64.sqrt();
    let q = g.sinh() / 4.0;
    let ch_gx = (2.0 * (g + x)).cosh();
    let ch_x = (2.0 * x).cosh();
    let ch_g = (2.0 * g).cosh();
    let root = 2.0 * 2f64.sqrt() * (ch_g + 7.0).sqrt() * x.sinh() * (g + x).sinh();
    let base = ch_gx + ch_g + ch_x - 3.0;
    let e = |kappa0: f64, eigenvalue: C64| TableEntry { kappa0, eigenvalue };
    Ok([
        e(1.0, q * (-(1.0 + i * r3) * ch_gx + i * (r3 + i) * ch_x + 2.0)),
        e(-1.0, q * ((1.0 - i * r3) * ch_gx + (1.0 + i * r3) * ch_x - 2.0)),
        e(1.0, q * (i * (r3 + i) * ch_gx - (1.0 + i * r3) * ch_x + 2.0)),
        e(-1.0, q * ((1.0 + i * r3) * ch_gx + (1.0 - i * r3) * ch_x - 2.0)),
        e(1.0, q * (base - root)),
        e(-1.0, -q * (base + root)),
        e(1.0, q * (base + root)),
        e(-1.0, -q * (base - root)),
    ])
}

/// For each reference value, the index of the nearest computed value and the
/// relative distance to it.
pub fn nearest_matches(computed: &[C64], reference: &[C64]) -> Vec<(usize, f64)> {
    reference
        .iter()
        .map(|r| {
            computed
                .iter()
                .enumerate()
                .map(|(k, z)| (k, (z - r).norm() / r.norm().max(f64::MIN_POSITIVE)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap_or((usize::MAX, f64::INFINITY))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_tables_pair_with_opposite_signs() {
        let p = ModelParams::new(C64::new(0.5, 0.1), vec![C64::new(0.2, 0.0), C64::new(-0.1, 0.3)]).unwrap();
        let t = spectrum_l2(&p, C64::new(0.3, 0.2)).unwrap();
        assert_eq!(t[0].eigenvalue, -t[1].eigenvalue);
        assert_eq!(t[2].eigenvalue, -t[3].eigenvalue);
    }

    #[test]
    fn matching_is_a_bijection_on_distinct_sets() {
        let a = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 2.0)];
        let b = [C64::new(0.0, 2.0), C64::new(1.0, 1e-12), C64::new(-1.0, 0.0)];
        let m = nearest_matches(&a, &b);
        assert_eq!(m.iter().map(|x| x.0).collect::<Vec<_>>(), vec![2, 0, 1]);
        assert!(m.iter().all(|x| x.1 < 1e-11));
    }
}
