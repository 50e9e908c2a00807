mod common;

use common::*;
use proptest::prelude::*;
use vertex_spectra::model::{ordered_complement, weight_a, weight_b, weight_c};
use vertex_spectra::subset::binomial;
use vertex_spectra::{GroundSet, IndexSubset, ModelParams, SpectralPoints, C64};

/// Taylor series of sinh, summed until the terms stop contributing.
fn sinh_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for k in 1..60 {
        term = term * z2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += term;
    }
    sum
}

fn gamma_only(g: C64) -> ModelParams {
    ModelParams::new(g, vec![c(0.0, 0.0)]).unwrap()
}

#[test]
fn weights_against_series() {
    let p = gamma_only(c(0.3, 0.0));
    let a = weight_a(c(0.2, 0.0), &p);
    assert!((a - sinh_series(c(0.5, 0.0))).norm() < 1e-15);
    assert!((a.re - 0.5210953054937474).abs() < 1e-15 && a.im == 0.0);
    assert!((weight_c(&p) - sinh_series(c(0.3, 0.0))).norm() < 1e-15);
    assert!((weight_c(&p).re - 0.3045202934).abs() < 1e-10);
    assert_eq!(weight_a(c(0.0, 0.0), &p), weight_c(&p));
    assert_eq!(weight_b(c(0.0, 0.0)), c(0.0, 0.0));
    let half_pi = c(0.0, std::f64::consts::FRAC_PI_2);
    assert!((weight_b(half_pi) - c(0.0, 1.0)).norm() < 1e-15);
    assert!((sinh_series(half_pi) - c(0.0, 1.0)).norm() < 1e-15);

    let mut g = rng(101);
    for _ in 0..50 {
        let p = gamma_only(gamma(&mut g));
        let x = point(&mut g);
        assert!((weight_a(x, &p) - sinh_series(x + p.gamma())).norm() < 1e-13);
        assert!((weight_b(x) - sinh_series(x)).norm() < 1e-13);
        assert_eq!(weight_a(-p.gamma(), &p), c(0.0, 0.0));
    }
}

#[test]
fn addition_theorem() {
    let mut g = rng(102);
    for _ in 0..200 {
        let p = gamma_only(gamma(&mut g));
        let x = point(&mut g);
        let r = weight_a(x, &p) - weight_b(x) * p.gamma().cosh() - weight_c(&p) * x.cosh();
        assert!(r.norm() < 1e-12);
    }
}

#[test]
fn ordered_complement_picks_remaining_points() {
    let p = ModelParams::new(c(0.5, 0.0), (0..4).map(|k| c(0.3 * k as f64, 0.0)).collect()).unwrap();
    let lam: Vec<C64> = (0..4).map(|k| c(-0.2 * k as f64, 0.1)).collect();
    let pts = SpectralPoints::new(lam.clone(), &p).unwrap();
    let oc = |g, r: Vec<usize>| ordered_complement(&IndexSubset::new(g, r, 4).unwrap(), &pts).unwrap();
    assert_eq!(oc(GroundSet::Full, vec![0, 1]), vec![lam[2], lam[3]]);
    assert_eq!(oc(GroundSet::Tail, vec![1, 2]), vec![lam[3]]);
    assert_eq!(oc(GroundSet::Full, vec![]), lam);
    assert!(IndexSubset::new(GroundSet::Tail, vec![0], 4).is_err());
    assert!(IndexSubset::new(GroundSet::Full, vec![2, 1], 4).is_err());
    assert!(IndexSubset::new(GroundSet::Full, vec![4], 4).is_err());
}

#[test]
fn rank_examples() {
    let rank = |g, r: Vec<usize>| IndexSubset::new(g, r, 4).unwrap().rank();
    assert_eq!(rank(GroundSet::Full, vec![0, 1]), 0);
    assert_eq!(rank(GroundSet::Full, vec![2, 3]), 5);
    assert_eq!(rank(GroundSet::Tail, vec![2, 3]), 2);
    assert!(IndexSubset::unrank(GroundSet::Full, 4, 2, 6).is_err());
}

#[test]
fn separation_guard() {
    let g = c(0.4, 0.1);
    assert!(ModelParams::new(g, vec![c(0.1, 0.0), c(0.1 + 1e-4, 0.0)]).is_err());
    assert!(ModelParams::with_separation(g, vec![c(0.1, 0.0), c(0.1 + 1e-4, 0.0)], 1e-5).is_ok());
    assert!(ModelParams::new(g, vec![]).is_err());
    let p = ModelParams::new(g, vec![c(0.1, 0.0), c(0.5, 0.0)]).unwrap();
    assert!(SpectralPoints::new(vec![c(0.2, 0.0), c(0.2, 0.0)], &p).is_err());
    assert!(SpectralPoints::new(vec![c(0.2, 0.0)], &p).is_err());
    let json = serde_json::to_string(&p).unwrap();
    assert!(json.contains("[0.1,0.0]"), "{json}");
}

proptest! {
    #[test]
    fn unrank_inverts_rank(l in 1usize..=8, tail in any::<bool>(), seed in any::<u64>()) {
        let ground = if tail { GroundSet::Tail } else { GroundSet::Full };
        let n = ground.size(l);
        let size = (seed as usize) % (n + 1);
        let count = binomial(n, size);
        let r = (seed >> 8) as usize % count.max(1);
        let s = IndexSubset::unrank(ground, l, size, r).unwrap();
        prop_assert_eq!(s.rank(), r);
        let comp = s.complement(l);
        prop_assert!(comp.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(comp.len() + size, n);
    }
}
