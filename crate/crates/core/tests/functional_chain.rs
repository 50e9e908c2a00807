mod common;

use common::*;
use vertex_spectra::chain::{fl_vs_z, ratio_spread, symmetry_residual, ChainConfig, FunctionalChain};
use vertex_spectra::closed_forms::{nearest_matches, spectrum_l2, spectrum_l3_uniform};
use vertex_spectra::determinant::kappa0;
use vertex_spectra::kernel::coeff_m;
use vertex_spectra::transfer::diagonalize_default;
use vertex_spectra::C64;

#[test]
fn lowest_orders() {
    let mut g = rng(601);
    let (p, pts) = sample(&mut g, 3);
    let s = diagonalize_default(&p).unwrap();
    let f0 = c(0.7, -1.3);
    let l = pts.values();
    for k in [0, 3, 7] {
        let mut ch = FunctionalChain::new(&p, &s, ChainConfig::new(k).with_f0(f0)).unwrap();
        let e = |x| s.eigenvalue_at(k, x).unwrap().0;
        assert_eq!(ch.eval(&[]).unwrap(), f0);
        assert!(rel(ch.eval(&l[..1]).unwrap(), e(l[0]) * f0) < 1e-14);
        let f2 = (e(l[0]) * e(l[1]) - coeff_m(&p, 1, 1, &l[..2]).unwrap()) * f0;
        assert!(rel(ch.eval(&l[..2]).unwrap(), f2) < 1e-12);
        assert!(rel(ch.eval(&[l[1], l[0]]).unwrap(), f2) < 1e-9);
    }
}

#[test]
fn symmetric_at_every_order() {
    let mut g = rng(602);
    for draw in 0..20 {
        for l in 2..=5 {
            let (p, pts) = sample(&mut g, l);
            let s = diagonalize_default(&p).unwrap();
            for k in 0..s.branch_count() {
                for n in 1..=l {
                    let r = symmetry_residual(&p, &s, ChainConfig::new(k), &pts.values()[..n]).unwrap();
                    let tol = if n == 1 { 0.0 } else { 1e-8 };
                    assert!(r <= tol, "draw {draw} L={l} branch {k} n={n}: {r:e}");
                }
            }
        }
    }
}

#[test]
fn ratio_is_inverse_kappa_for_uniform_three_sites() {
    let mut g = rng(603);
    let p = uniform_params(&mut g, 3);
    let s = diagonalize_default(&p).unwrap();
    let x = point(&mut g);
    let table = spectrum_l3_uniform(&p, x).unwrap();
    let reference: Vec<C64> = table.iter().map(|e| e.eigenvalue).collect();
    let sets: Vec<_> = (0..10).map(|_| points_for(&mut g, &p)).collect();
    for (row, (k, _)) in nearest_matches(&s.eigenvalues_at(x), &reference).into_iter().enumerate() {
        let ratios: Vec<C64> = sets.iter().map(|pts| fl_vs_z(&p, &s, ChainConfig::new(k), pts).unwrap()).collect();
        assert!(ratio_spread(&ratios) < 1e-8);
        let expected = 1.0 / table[row].kappa0;
        assert!(ratios.iter().all(|r| (r - expected).norm() < 1e-8), "row {row}: {:?}", ratios[0]);
    }
}

#[test]
fn ratio_is_inverse_kappa_for_two_sites() {
    let mut g = rng(604);
    let (p, pts) = sample(&mut g, 2);
    let s = diagonalize_default(&p).unwrap();
    let x = pts.values()[0];
    let table = spectrum_l2(&p, x).unwrap();
    let reference: Vec<C64> = table.iter().map(|e| e.eigenvalue).collect();
    for (row, (k, _)) in nearest_matches(&s.eigenvalues_at(x), &reference).into_iter().enumerate() {
        let r = fl_vs_z(&p, &s, ChainConfig::new(k), &pts).unwrap();
        assert!((r - 1.0 / table[row].kappa0).norm() < 1e-9);
        assert!(rel(kappa0(&p, &s, k).unwrap(), c(table[row].kappa0, 0.0)) < 1e-10);
    }
}

#[test]
fn ratio_scales_with_normalization() {
    let mut g = rng(605);
    for l in [3, 4] {
        let (p, pts) = sample(&mut g, l);
        let s = diagonalize_default(&p).unwrap();
        for k in 0..s.branch_count() {
            let one = fl_vs_z(&p, &s, ChainConfig::new(k), &pts).unwrap();
            let two = fl_vs_z(&p, &s, ChainConfig::new(k).with_f0(c(2.0, 0.0)), &pts).unwrap();
            assert!(rel(two, 2.0 * one) < 1e-12);
            assert!((kappa0(&p, &s, k).unwrap() * one - 1.0).norm() < 1e-8);
        }
    }
}

#[test]
fn canonical_memo_agrees_with_ordered_memo() {
    let mut g = rng(606);
    let (p, pts) = sample(&mut g, 4);
    let s = diagonalize_default(&p).unwrap();
    let mut a = FunctionalChain::new(&p, &s, ChainConfig::new(2)).unwrap();
    let mut b = FunctionalChain::new(&p, &s, ChainConfig::new(2)).unwrap().canonical(true);
    assert!(rel(a.eval(pts.values()).unwrap(), b.eval(pts.values()).unwrap()) < 1e-9);
    assert!(FunctionalChain::new(&p, &s, ChainConfig::new(2).with_f0(c(0.0, 0.0))).is_err());
    assert!(FunctionalChain::new(&p, &s, ChainConfig::new(16)).is_err());
}
