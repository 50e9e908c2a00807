mod common;

use common::*;
use vertex_spectra::closed_forms::{nearest_matches, spectrum_l2, spectrum_l3_uniform};
use vertex_spectra::linalg::frobenius;
use vertex_spectra::transfer::{build_transfer, diagonalize, diagonalize_default, DEFAULT_REFERENCE};
use vertex_spectra::{Error, ModelParams, C64};

#[test]
fn commuting_family() {
    let mut g = rng(501);
    for l in 1..=6 {
        let p = params(&mut g, l);
        for _ in 0..3 {
            let t1 = build_transfer(&p, point(&mut g)).unwrap().matrix;
            let t2 = build_transfer(&p, point(&mut g)).unwrap().matrix;
            let comm = &t1 * &t2 - &t2 * &t1;
            assert!(frobenius(&comm) <= 1e-10 * frobenius(&t1) * frobenius(&t2), "L={l}");
        }
    }
}

#[test]
fn eigenvalues_sum_to_trace() {
    let mut g = rng(502);
    for l in 1..=6 {
        let p = params(&mut g, l);
        let s = diagonalize_default(&p).unwrap();
        assert_eq!(s.branch_count(), 1 << l);
        assert!(s.reference_leakage() < 1e-9);
        for _ in 0..5 {
            let x = point(&mut g);
            let tr = build_transfer(&p, x).unwrap().trace();
            let sum: C64 = s.eigenvalues_at(x).iter().sum();
            let scale = s.eigenvalues_at(x).iter().map(|z| z.norm()).sum::<f64>();
            assert!((sum - tr).norm() <= 1e-9 * scale.max(tr.norm()), "L={l}");
        }
    }
}

#[test]
fn reference_point_reproduces_diagonalization() {
    let mut g = rng(503);
    let p = params(&mut g, 3);
    let s = diagonalize(&p, DEFAULT_REFERENCE).unwrap();
    for (k, &e) in s.eigenvalues().iter().enumerate() {
        let (v, leak) = s.eigenvalue_at(k, DEFAULT_REFERENCE).unwrap();
        assert!(rel(v, e) < 1e-12 && leak < 1e-9);
    }
    let moduli: Vec<f64> = s.eigenvalues().iter().map(|z| z.norm()).collect();
    assert!(moduli.windows(2).all(|w| w[0] >= w[1] - 1e-9 * w[0]));
    assert!(matches!(s.eigenvalue_at(8, DEFAULT_REFERENCE), Err(Error::BranchOutOfRange { .. })));
}

#[test]
fn two_site_table_along_a_grid() {
    let mut g = rng(504);
    for _ in 0..5 {
        let p = params(&mut g, 2);
        let s = diagonalize_default(&p).unwrap();
        let table = |x| spectrum_l2(&p, x).unwrap().map(|e| e.eigenvalue);
        // pin each branch to a table row once, then follow it
        let start = point(&mut g);
        let rows: Vec<usize> = (0..4)
            .map(|k| nearest_matches(&table(start), &[s.eigenvalue_at(k, start).unwrap().0])[0].0)
            .collect();
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        for step in 0..10 {
            let x = start + c(0.1 * step as f64, -0.03 * step as f64);
            let t = table(x);
            for k in 0..4 {
                assert!(rel(s.eigenvalue_at(k, x).unwrap().0, t[rows[k]]) < 1e-9);
            }
        }
    }
}

#[test]
fn three_site_uniform_table() {
    let mut g = rng(505);
    for _ in 0..5 {
        let p = uniform_params(&mut g, 3);
        let s = diagonalize_default(&p).unwrap();
        for _ in 0..3 {
            let x = point(&mut g);
            let t: Vec<C64> = spectrum_l3_uniform(&p, x).unwrap().iter().map(|e| e.eigenvalue).collect();
            let m = nearest_matches(&s.eigenvalues_at(x), &t);
            assert!(m.iter().all(|(_, e)| *e < 1e-9));
            let mut idx: Vec<usize> = m.iter().map(|x| x.0).collect();
            idx.sort();
            idx.dedup();
            assert_eq!(idx.len(), 8);
        }
    }
}

#[test]
fn spectrum_closed_under_negation() {
    let mut g = rng(506);
    for l in [2, 3] {
        let p = params(&mut g, l);
        let s = diagonalize_default(&p).unwrap();
        let x = point(&mut g);
        let e = s.eigenvalues_at(x);
        let neg: Vec<C64> = e.iter().map(|z| -z).collect();
        assert!(nearest_matches(&e, &neg).iter().all(|(_, err)| *err < 1e-9));
    }
}

#[test]
fn branches_are_smooth_in_lambda() {
    let mut g = rng(507);
    for l in [2, 3, 4] {
        let p = params(&mut g, l);
        let s = diagonalize_default(&p).unwrap();
        let start = point(&mut g);
        let dir = c(0.6, 0.2);
        let slope = |h: f64| -> Vec<f64> {
            let n = (1.0 / h) as usize;
            let grid: Vec<C64> = (0..=n).map(|i| start + dir * (i as f64 * h)).collect();
            let samples = s.sample(&grid);
            samples.iter().map(|b| b.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max) / h).collect()
        };
        let coarse = slope(1e-2);
        let fine = slope(1e-3);
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() <= 0.05 * a.max(1e-12), "L={l}: {a} vs {b}");
        }
    }
}

#[test]
fn degenerate_and_oversized_inputs() {
    let p = ModelParams::new(c(0.0, 0.0), vec![c(0.1, 0.0), c(0.4, 0.2)]).unwrap();
    assert!(matches!(diagonalize_default(&p), Err(Error::DegenerateSpectrum(_))));
    let mut g = rng(508);
    let big = params(&mut g, 11);
    assert!(matches!(build_transfer(&big, c(0.1, 0.0)), Err(Error::SizeGuard { .. })));
    let one = params(&mut g, 1);
    let s = diagonalize_default(&one).unwrap();
    let cc = one.c();
    assert!(rel(s.eigenvalues()[0], cc).min(rel(s.eigenvalues()[0], -cc)) < 1e-12);
    assert!(rel(s.eigenvalues()[0], -s.eigenvalues()[1]) < 1e-12);
}
