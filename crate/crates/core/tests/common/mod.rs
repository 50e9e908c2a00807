#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vertex_spectra::{ModelParams, SpectralPoints, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, re: [f64; 2], im: [f64; 2]) -> C64 {
    c(rng.random_range(re[0]..re[1]), rng.random_range(im[0]..im[1]))
}

pub fn gamma(rng: &mut ChaCha8Rng) -> C64 {
    uniform(rng, [0.2, 1.2], [-0.5, 0.5])
}

pub fn point(rng: &mut ChaCha8Rng) -> C64 {
    uniform(rng, [-1.0, 1.0], [-0.5, 0.5])
}

pub fn points_for(rng: &mut ChaCha8Rng, params: &ModelParams) -> SpectralPoints {
    let l = params.len();
    loop {
        let lam: Vec<C64> = (0..l).map(|_| point(rng)).collect();
        let clear = lam.iter().all(|&x| {
            params.mu().iter().all(|&m| params.a(x - m).norm() > 1e-2 && params.b(x - m).norm() > 1e-2)
                && lam.iter().all(|&y| x == y || params.a(x - y).norm() > 1e-2)
        });
        if let (true, Ok(p)) = (clear, SpectralPoints::new(lam, params)) {
            return p;
        }
    }
}

pub fn params(rng: &mut ChaCha8Rng, l: usize) -> ModelParams {
    loop {
        let g = gamma(rng);
        let mu: Vec<C64> = (0..l).map(|_| point(rng)).collect();
        let clear = mu.iter().all(|&x| mu.iter().all(|&y| x == y || (x - y + g).sinh().norm() > 1e-2));
        if let (true, Ok(p)) = (clear, ModelParams::new(g, mu)) {
            return p;
        }
    }
}

pub fn sample(rng: &mut ChaCha8Rng, l: usize) -> (ModelParams, SpectralPoints) {
    let p = params(rng, l);
    let pts = points_for(rng, &p);
    (p, pts)
}

/// `μ_j = 0` for all `j`.
pub fn uniform_params(rng: &mut ChaCha8Rng, l: usize) -> ModelParams {
    ModelParams::allow_coincident_mu(gamma(rng), vec![c(0.0, 0.0); l]).unwrap()
}

pub fn rel(x: C64, reference: C64) -> f64 {
    (x - reference).norm() / reference.norm()
}

pub mod printed {
    //! The 4×4 and 10×10 matrices exactly as displayed for `L = 3, 4`.

    use super::c;
    use vertex_spectra::kernel::{coeff_m, coeff_n};
    use vertex_spectra::linalg::CMatrix;
    use vertex_spectra::{ModelParams, SpectralPoints, SpectrumTable, C64};

    pub fn h3(p: &ModelParams, pts: &SpectralPoints, s: &SpectrumTable, k: usize) -> CMatrix {
        let l = pts.values();
        let e = |i: usize| s.eigenvalue_at(k, l[i]).unwrap().0;
        let m = |n, i, args: &[C64]| coeff_m(p, n, i, args).unwrap();
        let n21 = coeff_n(p, 2, 2, 1, l).unwrap();
        let (o, one) = (c(0.0, 0.0), c(1.0, 0.0));
        #[rustfmt::skip]
        let h = CMatrix::from_row_slice(4, 4, &[
            e(2), -one, o, o,
            e(1), o, -one, o,
            e(0), o, o, -one,
            -m(1, 1, &[l[1], l[2]]) * e(0), e(0) * e(1) - m(2, 1, l), -m(2, 2, l), -n21,
        ]);
        h
    }

    pub fn h4(p: &ModelParams, pts: &SpectralPoints, s: &SpectrumTable, k: usize) -> CMatrix {
        let l = pts.values();
        let e = |i: usize| s.eigenvalue_at(k, l[i]).unwrap().0;
        let m1 = |a: usize, b: usize| coeff_m(p, 1, 1, &[l[a], l[b]]).unwrap();
        let tail = &l[1..];
        let m2 = |i| coeff_m(p, 2, i, tail).unwrap();
        let n2 = coeff_n(p, 2, 2, 1, tail).unwrap();
        let m3 = |i| coeff_m(p, 3, i, l).unwrap();
        let n3 = |j, i| coeff_n(p, 3, j, i, l).unwrap();
        let (o, one) = (c(0.0, 0.0), c(1.0, 0.0));
        #[rustfmt::skip]
        let h = CMatrix::from_row_slice(10, 10, &[
            e(3), -one, o, o, o, o, o, o, o, o,
            e(2), o, -one, o, o, o, o, o, o, o,
            e(1), o, o, -one, o, o, o, o, o, o,
            -m1(2, 3), e(2), o, o, -one, o, o, o, o, o,
            -m1(1, 3), e(1), o, o, o, -one, o, o, o, o,
            -m1(1, 2), o, e(1), o, o, o, -one, o, o, o,
            -m1(0, 3), e(0), o, o, o, o, o, -one, o, o,
            -m1(0, 2), o, e(0), o, o, o, o, o, -one, o,
            -m1(0, 1), o, o, e(0), o, o, o, o, o, -one,
            o, -e(0) * m2(1), -e(0) * m2(2), -e(0) * n2,
            e(0) * e(1) - m3(1), -m3(2), -m3(3), -n3(2, 1), -n3(3, 1), -n3(3, 2),
        ]);
        h
    }

    /// Largest entrywise relative deviation; zero entries compare absolutely.
    pub fn deviation(built: &CMatrix, printed: &CMatrix) -> f64 {
        assert_eq!(built.shape(), printed.shape());
        built
            .iter()
            .zip(printed.iter())
            .map(|(x, y)| if y.norm() == 0.0 { x.norm() } else { (x - y).norm() / y.norm() })
            .fold(0.0, f64::max)
    }
}
