use std::sync::Arc;

use navier_mems::hardy_rellich::{
    auxiliary_phi, bessel_pair_test, boundary_gradient_weight, classical_weight,
    first_order_boundary_weight, hardy_rellich_constant, improved_weight_31, improved_weight_32,
    paired_weight_w1, verify_weight_rayleigh, BesselOptions, BesselPairSpec, EndpointLimit,
    OdeVerdict, RadialWeight, RationalTerm, WeightChoice,
};
use navier_mems::radial::{int, make_grid, q, Grading, PowerSum, RadialGrid, Rational};
use navier_mems::stability::{
    rayleigh_min_first_order, rayleigh_min_mode, FirstOrderBoundary, Numerator,
};
use navier_mems::Error;

fn grid(m: usize) -> Arc<RadialGrid> {
    Arc::new(make_grid(m, 1e-8, Grading::Geometric).unwrap())
}

// independent f64 transcriptions of the weights
fn improved31_f64(n: f64, r: f64) -> f64 {
    let alpha = n / (2.0 * (n - 1.0));
    let fa = r * r - alpha * r.powf(n / 2.0 + 1.0);
    let f1 = r * r - r.powf(n / 2.0);
    (n - 2.0).powi(2) * (n - 4.0).powi(2) / 16.0 / (fa * f1)
        + (n - 1.0) * (n - 4.0).powi(2) / 4.0 / (r * r * f1)
}

fn phi_f64(n: f64, r: f64) -> f64 {
    r.powf(2.0 - n / 2.0) + 9.0 / (r * r) + 10.0 * r - 20.0
}

fn improved32_f64(n: f64, r: f64) -> f64 {
    let e = 2.0 - n / 2.0;
    let d1 = e * r.powf(e - 1.0) - 18.0 / r.powi(3) + 10.0;
    let d2 = e * (e - 1.0) * r.powf(e - 2.0) + 54.0 / r.powi(4);
    let k = -(d2 + (n - 3.0) / r * d1) / phi_f64(n, r);
    let alpha = n / (2.0 * (n - 1.0));
    k * ((n - 2.0).powi(2) / (4.0 * (r * r - alpha * r.powf(n / 2.0 + 1.0))) + (n - 1.0) / (r * r))
}

#[test]
fn weight_values() {
    assert_eq!(hardy_rellich_constant(16), int(2304));
    assert_eq!(hardy_rellich_constant(9), q(2025, 16));
    let w = classical_weight(16).unwrap();
    assert!((w.eval(0.5).unwrap() - 2304.0 * 16.0).abs() < 1e-9);
    assert!(classical_weight(4).is_err());

    let w31 = improved_weight_31(10).unwrap();
    for r in [1e-4, 0.1, 0.5, 0.9, 0.999] {
        let exact = improved31_f64(10.0, r);
        assert!(
            (w31.eval(r).unwrap() / exact - 1.0).abs() < 1e-12,
            "r = {r}"
        );
    }
    // exact rational evaluation at r = 1/2
    assert!((w31.eval(0.5).unwrap() - 4_209.003_083_247_688).abs() < 1e-6);

    let w32 = improved_weight_32(12).unwrap();
    for r in [1e-3, 0.3, 0.7, 0.99] {
        let exact = improved32_f64(12.0, r);
        assert!((w32.eval(r).unwrap() / exact - 1.0).abs() < 1e-9, "r = {r}");
    }
    assert!(improved_weight_31(5).unwrap().eval(0.9).unwrap() > 0.0);
}

#[test]
fn auxiliary_phi_is_positive() {
    for n in 7..=40 {
        let phi = auxiliary_phi(n);
        for i in 1..2000 {
            let r = f64::from(i) / 2000.0;
            assert!(phi.eval(r).unwrap() > 0.0, "N = {n}, r = {r}");
            assert!((phi.eval(r).unwrap() / phi_f64(f64::from(n), r) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn improved32_domain() {
    for n in [5, 6] {
        assert!(matches!(
            improved_weight_32(n),
            Err(Error::WeightConstruction(_))
        ));
    }
    // the auxiliary K changes sign below N = 9
    for n in [7, 8] {
        assert!(
            matches!(improved_weight_32(n), Err(Error::WeightConstruction(_))),
            "N = {n}"
        );
    }
    for n in 9..=40 {
        assert!(improved_weight_32(n).is_ok(), "N = {n}");
    }
}

#[test]
fn endpoint_limits_match_evaluation() {
    for n in [5, 9, 16, 30] {
        for choice in [
            WeightChoice::Classical,
            WeightChoice::Improved31,
            WeightChoice::Improved32,
        ] {
            let Ok(w) = choice.build(n) else { continue };
            match w.limit_at_one() {
                EndpointLimit::Finite { approx, .. } => {
                    let near = w.eval(1.0 - 1e-7).unwrap();
                    assert!((near / approx - 1.0).abs() < 1e-2, "{} N = {n}", w.name);
                }
                EndpointLimit::PlusInfinity { .. } => {
                    assert!(
                        w.eval(1.0 - 1e-6).unwrap() > 1e3 * w.eval(0.9).unwrap(),
                        "{} N = {n}",
                        w.name
                    );
                }
                other => panic!("{} N = {n}: {other:?}", w.name),
            }
        }
    }
    assert!(matches!(
        classical_weight(16).unwrap().limit_at_one(),
        EndpointLimit::Finite { ref value, .. } if value == "2304"
    ));
}

fn hardy(n: u32, scale: Rational) -> RadialWeight {
    let c = int((i64::from(n) - 2).pow(2)) / int(4) * scale;
    RadialWeight::new(
        "hardy",
        vec![RationalTerm::new(
            PowerSum::constant(c),
            PowerSum::monomial(int(1), int(2)),
        )],
    )
    .unwrap()
}

#[test]
fn euler_equation_cases() {
    let one = RadialWeight::from_power_sum("one", PowerSum::one()).unwrap();
    let opts = BesselOptions::default();
    let at = |s: Rational| {
        let spec = BesselPairSpec::new(one.clone(), hardy(5, s), 5).unwrap();
        bessel_pair_test(&spec, &opts).unwrap()
    };
    let sub = at(q(1, 2));
    assert_eq!(sub.verdict, OdeVerdict::Positive);
    assert!(!sub.complex_exponents);
    // critical constant: double indicial root −(N−2)/2
    let crit = at(int(1));
    assert_eq!(crit.verdict, OdeVerdict::Positive);
    assert!((crit.exponent + 1.5).abs() < 1e-12);
    let sup = at(q(21, 20));
    assert!(sup.complex_exponents);
    assert!(matches!(sup.verdict, OdeVerdict::SignChange { .. }));
}

#[test]
fn ode_and_rayleigh_agree() {
    let n = 10;
    let one = RadialWeight::from_power_sum("one", PowerSum::one()).unwrap();
    let g = grid(8000);
    for (s, expect_positive) in [(q(1, 2), true), (int(1), true), (q(21, 20), false)] {
        let w = hardy(n, s);
        let spec = BesselPairSpec::new(one.clone(), w.clone(), n).unwrap();
        let ode = bessel_pair_test(&spec, &BesselOptions::default()).unwrap();
        let ray = rayleigh_min_first_order(n, None, &w, g.clone(), FirstOrderBoundary::Dirichlet)
            .unwrap();
        assert_eq!(ode.verdict == OdeVerdict::Positive, expect_positive);
        assert_eq!(
            ray.quotient >= 1.0 - 0.02,
            expect_positive,
            "quotient {}",
            ray.quotient
        );
    }
}

#[test]
fn boundary_pairs_are_positive() {
    for n in [9, 10, 16] {
        let one = RadialWeight::from_power_sum("one", PowerSum::one()).unwrap();
        let pairs = [
            (one, first_order_boundary_weight(n).unwrap()),
            (
                boundary_gradient_weight(n).unwrap(),
                paired_weight_w1(n).unwrap(),
            ),
        ];
        for (v, w) in pairs {
            let spec = BesselPairSpec::new(v, w, n).unwrap();
            assert!(spec.inverse_integral_diverges);
            let ode = bessel_pair_test(&spec, &BesselOptions::default()).unwrap();
            assert_eq!(ode.verdict, OdeVerdict::Positive, "N = {n}");
        }
    }
}

#[test]
fn first_order_boundary_inequality() {
    let g = grid(8000);
    let w = first_order_boundary_weight(10).unwrap();
    let dir =
        rayleigh_min_first_order(10, None, &w, g.clone(), FirstOrderBoundary::Dirichlet).unwrap();
    assert!(dir.quotient >= 0.98, "{}", dir.quotient);
    let free = rayleigh_min_first_order(10, None, &w, g, FirstOrderBoundary::Free { penalty: 9.0 })
        .unwrap();
    assert!(free.quotient >= 0.98, "{}", free.quotient);
    assert!(free.quotient <= dir.quotient + 1e-9);
}

#[test]
fn classical_rellich_is_sharp_on_the_grid() {
    let n = 10;
    let g = grid(16_000);
    let w = classical_weight(n).unwrap();
    let report = verify_weight_rayleigh(n, &w, 3, g.clone()).unwrap();
    assert!(report.passed);
    assert!(report.min_quotient() >= 0.98);
    let inflated = w.scale(&q(21, 20));
    let r = rayleigh_min_mode(n, 0, &inflated, g, Numerator::Laplacian).unwrap();
    assert!(r.quotient < 0.98, "{}", r.quotient);
    let verified = report.verified_weight(w);
    assert_eq!(verified.verification.as_ref().unwrap().modes, 4);
}

#[test]
fn weights_round_trip_through_json() {
    let w = improved_weight_32(11).unwrap();
    let text = serde_json::to_string(&w).unwrap();
    let back: RadialWeight = serde_json::from_str(&text).unwrap();
    assert_eq!(back, w);
    assert_eq!(back.eval(0.4).unwrap(), w.eval(0.4).unwrap());
    assert_eq!(
        "improved_31".parse::<WeightChoice>().unwrap(),
        WeightChoice::Improved31
    );
    assert!("rellich".parse::<WeightChoice>().is_err());
}
