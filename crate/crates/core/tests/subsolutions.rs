use std::sync::Arc;

use navier_mems::branch::{continue_branch, ContinuationControls, ProblemParams};
use navier_mems::hardy_rellich::{improved_weight_32, verify_weight_rayleigh};
use navier_mems::radial::powersum::to_f64;
use navier_mems::radial::{int, make_grid, q, Grading, Rational};
use navier_mems::subsolutions::{
    certify, certify_spec, certify_with_tension, coefficients, h_n, lambda_bar, profile,
    regularity_criterion, table1_verify_range, table_lambda_prime, tau_beta_margin,
    touchdown_profile_check, CertifyOptions, SubSolutionSpec, TableCase, Verdict,
};

fn exponents() -> [Rational; 3] {
    [int(2), q(14, 5), int(3)]
}

#[test]
fn profile_identities() {
    for n in 5..=40 {
        for m in exponents() {
            let (a, b) = coefficients(n, &m).unwrap();
            assert_eq!(&a - &b, int(1));
            let w = profile(n, &m).unwrap();
            assert_eq!(w.value_at_one(), int(0), "N = {n}, m = {m}");
            assert_eq!(w.laplacian(n).value_at_one(), int(0), "N = {n}, m = {m}");
            assert_eq!(w.value_at_zero(), Some(int(1)));
        }
    }
    // a = m(N+m−2) / (m(N+m−2) − (4/3)(N−2/3)) at N = 9, m = 14/5
    let m = q(14, 5);
    let top = &m * (int(7) + &m);
    let a = &top / (&top - q(4, 3) * q(25, 3));
    assert_eq!(coefficients(9, &m).unwrap().0, a);
}

#[test]
fn profiles_stay_in_unit_interval() {
    for n in [9, 12, 20, 31, 40] {
        let spec = SubSolutionSpec::table(n).unwrap();
        for i in 0..=1000 {
            let r = f64::from(i) / 1000.0;
            let v = spec.profile.eval(r).unwrap();
            assert!((-1e-14..=1.0 + 1e-14).contains(&v), "N = {n}, r = {r}: {v}");
        }
    }
}

#[test]
fn criterion_constants() {
    assert_eq!(lambda_bar(9), q(3800, 81));
    assert_eq!(h_n(9), q(2025, 16));
    for n in 5..=64u32 {
        let nf = f64::from(n);
        let lb = 8.0 * (nf - 2.0 / 3.0) * (nf - 8.0 / 3.0) / 9.0;
        let h = nf * nf * (nf - 4.0).powi(2) / 16.0;
        assert!((to_f64(&lambda_bar(n)) - lb).abs() < 1e-9 * lb);
        assert_eq!(regularity_criterion(n), 2.0 * lb <= h, "N = {n}");
        assert_eq!(regularity_criterion(n), n >= 9);
    }
}

#[test]
fn table_constants() {
    let rows = [
        (9, 249),
        (10, 320),
        (11, 405),
        (12, 502),
        (13, 610),
        (14, 730),
        (15, 860),
    ];
    for (n, l) in rows {
        assert_eq!(table_lambda_prime(n), Some(int(l)));
    }
    assert_eq!(table_lambda_prime(16), Some(int(1151)));
    assert_eq!(table_lambda_prime(31), Some(int(27) * lambda_bar(31)));
    assert_eq!(table_lambda_prime(8), None);
    assert_eq!(TableCase::default_for(30), Some(TableCase::MidRange));
    assert_eq!(TableCase::default_for(31), Some(TableCase::HighRange));
}

#[test]
fn table_rows_certify() {
    let dims: Vec<u32> = (9..=40).collect();
    let opts = CertifyOptions::default();
    for (n, r) in dims.iter().zip(table1_verify_range(&dims, &opts)) {
        let r = r.unwrap();
        assert_eq!(r.verdict, Verdict::Certified, "N = {n}");
        assert!(
            r.margins.pde.min > 0.0 && r.margins.stability.min > 0.0,
            "N = {n}"
        );
        assert!(r.singular && r.profile_in_unit_interval && r.weight_verified);
    }
}

#[test]
fn rules_at_the_seam() {
    let opts = CertifyOptions::default();
    let run = |n, case| certify_spec(&SubSolutionSpec::for_case(n, case).unwrap(), &opts).unwrap();
    assert!(run(30, TableCase::MidRange).verdict.is_certified());
    assert!(run(31, TableCase::MidRange).verdict.is_certified());
    assert!(!run(30, TableCase::HighRange).verdict.is_certified());
    assert!(run(31, TableCase::HighRange).verdict.is_certified());
}

#[test]
fn high_range_chain() {
    for n in 31..=64u32 {
        let spec = SubSolutionSpec::for_case(n, TableCase::HighRange).unwrap();
        let lb = lambda_bar(n);
        assert!(spec.a < int(3), "N = {n}");
        assert!(spec.a.pow(3) * &lb <= int(27) * &lb);
        assert!(int(27) * &lb < h_n(n) / int(2), "N = {n}");
    }
    assert!(int(27) * lambda_bar(30) >= h_n(30) / int(2));
}

#[test]
fn refinement_adds_no_violations() {
    let n = 12;
    let spec = SubSolutionSpec::table(n).unwrap();
    let weight = spec.weight.build(n).unwrap();
    let vg = Arc::new(make_grid(4000, 1e-8, Grading::Geometric).unwrap());
    let weight = verify_weight_rayleigh(n, &weight, 3, vg)
        .unwrap()
        .verified_weight(weight);
    // 2M − 1 geometric nodes contain the M-node grid
    let coarse = make_grid(2000, 1e-8, Grading::Geometric).unwrap();
    let fine = make_grid(3999, 1e-8, Grading::Geometric).unwrap();
    let a = certify(&spec, &weight, &coarse).unwrap();
    let b = certify(&spec, &weight, &fine).unwrap();
    assert!(a.verdict.is_certified() && b.verdict.is_certified());
    assert!(b.margins.pde.min <= a.margins.pde.min);
    assert!(b.margins.pde.min > 0.0 && b.margins.stability.min > 0.0);
}

#[test]
fn unverified_weight_is_inconclusive() {
    let spec = SubSolutionSpec::table(9).unwrap();
    let grid = make_grid(2000, 1e-8, Grading::Geometric).unwrap();
    let r = certify(&spec, &improved_weight_32(9).unwrap(), &grid).unwrap();
    assert!(matches!(r.verdict, Verdict::Inconclusive { .. }));
}

#[test]
fn larger_lambda_breaks_the_side_condition() {
    let t = SubSolutionSpec::table(9).unwrap();
    let spec = SubSolutionSpec::new(9, t.m.clone(), int(400), t.sigma.clone(), t.weight).unwrap();
    let r = certify_spec(&spec, &CertifyOptions::default()).unwrap();
    assert!(r.margins.pde.min > 0.0);
    match r.verdict {
        Verdict::Violated { condition, .. } => assert_eq!(condition, "sigma_exceeds_lambda"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tension_margin() {
    let spec = SubSolutionSpec::table(9).unwrap();
    let grid = make_grid(20_000, 1e-8, Grading::Geometric).unwrap();
    assert_eq!(
        tau_beta_margin(&spec, &spec.lambda_prime, &grid).unwrap(),
        0.0
    );
    let one = tau_beta_margin(&spec, &(&spec.lambda_prime + q(1, 2)), &grid).unwrap();
    let two = tau_beta_margin(&spec, &(&spec.lambda_prime + int(1)), &grid).unwrap();
    assert!(two >= 2.0 * one * (1.0 - 1e-12));
    let rho = tau_beta_margin(&spec, &int(250), &grid).unwrap();
    // 1 / max (1−u)²(−Δu), from a 2·10⁶-point f64 scan of the closed form
    assert!((rho - 0.152_822_078_689).abs() < 1e-9, "{rho}");
    assert!(tau_beta_margin(&spec, &int(251), &grid).is_err());

    // the tensioned certificate holds with half the margin
    let weight = spec.weight.build(9).unwrap();
    let vg = Arc::new(make_grid(4000, 1e-8, Grading::Geometric).unwrap());
    let weight = verify_weight_rayleigh(9, &weight, 3, vg)
        .unwrap()
        .verified_weight(weight);
    let half = Rational::from_float(rho / 2.0).unwrap();
    let r = certify_with_tension(&spec, &weight, &grid, &half, &int(250)).unwrap();
    assert!(r.verdict.is_certified());
}

#[test]
fn touchdown_constant_scaling() {
    let g = Arc::new(make_grid(1000, 1e-6, Grading::Geometric).unwrap());
    let p = ProblemParams::new(9, 1.0, 0.0).unwrap();
    let branch = continue_branch(&p, g, None, &ContinuationControls::default()).unwrap();
    let one = touchdown_profile_check(&branch, 9, 1.0);
    let eight = touchdown_profile_check(&branch, 9, 8.0);
    assert!((one.constant / eight.constant - 2.0).abs() < 1e-12);
    assert!(one.constant > 1.0);
    assert_eq!(one.points.len(), branch.points.len());
    // signed slack shrinks as the branch approaches the bracket
    let slack: Vec<f64> = one.points.iter().map(|p| p.max_slack).collect();
    assert!(slack.windows(2).all(|w| w[1] <= w[0]), "{slack:?}");
    assert!(one.last.unwrap().max_slack < one.points[0].max_slack);
}
