use vertex_spectra::verify::{run_selftest, run_verify, PointStatus, SelftestOptions, SweepConfig, Verdict};
use vertex_spectra::C64;

#[test]
fn selftest_passes_on_fresh_build() {
    let r = run_selftest(42, SelftestOptions::default());
    for c in &r.checks {
        assert!(c.passed, "{} failed: {:e} > {:e} {:?}", c.name, c.max_error, c.tolerance, c.detail);
    }
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn corrupted_weight_fails_the_l2_closed_form_first() {
    let r = run_selftest(42, SelftestOptions { corrupt_weight_sign: true });
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.first_failure, Some("l2-closed-form"));
}

#[test]
fn selftest_is_deterministic() {
    let a = vertex_spectra::verify::to_json_string(&run_selftest(5, SelftestOptions::default()));
    let b = vertex_spectra::verify::to_json_string(&run_selftest(5, SelftestOptions::default()));
    assert_eq!(a, b);
}

#[test]
fn sweep_l3_to_l5_passes() {
    let r = run_verify(&SweepConfig::new(vec![3, 4, 5], 10, 42)).unwrap();
    assert_eq!(r.points.len(), 30);
    assert_eq!(r.summary.verified, 30);
    assert!(r.summary.max_end_to_end < 1e-8, "{:e}", r.summary.max_end_to_end);
    assert_eq!(r.summary.verdict, Verdict::Pass);
}

#[test]
fn report_bytes_repeat_for_same_seed() {
    let cfg = SweepConfig::new(vec![2, 3], 4, 11);
    let a = run_verify(&cfg).unwrap();
    let b = run_verify(&cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
    let c = run_verify(&SweepConfig::new(vec![2, 3], 4, 12)).unwrap();
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn colliding_points_are_skipped_not_failed() {
    let mut cfg = SweepConfig::new(vec![3], 3, 1);
    cfg.strict_separation = false;
    cfg.lambda = Some(vec![C64::new(0.1, 0.2), C64::new(0.1, 0.2), C64::new(-0.4, 0.0)]);
    let r = run_verify(&cfg).unwrap();
    assert!(r.points.iter().all(|p| p.status == PointStatus::Separation));
    assert_eq!(r.summary.separation_skips, 3);
    assert_eq!(r.summary.verdict, Verdict::Pass);
}

#[test]
fn l2_report_lists_four_branches_with_unit_kappa() {
    let r = run_verify(&SweepConfig::new(vec![2], 3, 3)).unwrap();
    assert!(r.passed());
    for p in &r.points {
        let m = p.metrics.as_ref().unwrap();
        assert_eq!(m.branches.len(), 4);
        let mut signs: Vec<i32> = m
            .branches
            .iter()
            .map(|b| {
                assert!((b.kappa0.norm() - 1.0).abs() < 1e-10, "{}", b.kappa0);
                assert!(b.kappa0.im.abs() < 1e-10);
                b.kappa0.re.signum() as i32
            })
            .collect();
        signs.sort();
        assert_eq!(signs, vec![-1, -1, 1, 1]);
    }
}

#[test]
fn report_carries_both_korepin_prefactors() {
    let r = run_verify(&SweepConfig::new(vec![3], 2, 8)).unwrap();
    let json = r.to_json();
    assert!(json.contains("korepinPinnedForm") && json.contains("korepinPrintedForm"));
    let k = r.points[0].metrics.as_ref().unwrap().korepin.as_ref().unwrap();
    assert!(k.residual < 1e-9);
    assert!((k.printed_ratio - 1.0).norm() > 1e-3);
}
