use std::sync::Arc;

use navier_mems::hardy_rellich::auxiliary_phi;
use navier_mems::radial::powersum::to_f64;
use navier_mems::radial::{
    discrete_laplacian, int, integrate_radial, make_grid, power_bilaplacian, power_laplacian, q,
    Grading, PowerSum, RadialGrid, Rational,
};
use navier_mems::stability::dirichlet_laplacian_smallest;
use navier_mems::subsolutions::profile;
use proptest::prelude::*;

fn mono(c: Rational, e: Rational) -> PowerSum {
    PowerSum::monomial(c, e)
}

#[test]
fn laplacian_examples() {
    assert!(power_laplacian(&PowerSum::one(), 5).is_zero());
    assert_eq!(
        power_laplacian(&mono(int(1), int(2)), 5),
        PowerSum::constant(int(10))
    );
    // p(p + N − 2) at p = 4/3, N = 9
    let c = q(4, 3) * (q(4, 3) + int(7));
    assert_eq!(c, q(100, 9));
    assert_eq!(
        power_laplacian(&mono(int(1), q(4, 3)), 9),
        mono(c, q(-2, 3))
    );
}

#[test]
fn bilaplacian_examples() {
    // Δ²r⁴ = 4(N+2)·2N
    assert_eq!(
        power_bilaplacian(&mono(int(1), int(4)), 5),
        PowerSum::constant(int(280))
    );
    // Δ²(−r^{4/3}) = −(4/3)(4/3+7)(−2/3)(−2/3+7) r^{−8/3}
    let c = -(q(4, 3) * q(25, 3) * q(-2, 3) * q(19, 3));
    assert_eq!(c, q(3800, 81));
    assert_eq!(
        power_bilaplacian(&mono(int(-1), q(4, 3)), 9),
        mono(c, q(-8, 3))
    );
    assert!(power_bilaplacian(&PowerSum::one(), 7).is_zero());
}

#[test]
fn evaluation_examples() {
    for n in [5, 9, 12] {
        assert_eq!(auxiliary_phi(n).eval(1.0).unwrap(), 0.0);
    }
    let w3 = profile(10, &int(3)).unwrap();
    assert!(w3.eval(1.0).unwrap().abs() < 1e-15);
    assert_eq!(w3.value_at_one(), int(0));
    assert_eq!(PowerSum::one().eval(0.5).unwrap(), 1.0);
    assert!(mono(int(1), int(-1)).eval(0.0).is_err());
    assert!(mono(int(1), int(2)).eval(-0.1).is_err());
}

#[test]
fn grid_examples() {
    let g = make_grid(16, 1e-8, Grading::Geometric).unwrap();
    assert_eq!(g.len(), 16);
    assert_eq!(*g.nodes().last().unwrap(), 1.0);
    assert!((g.nodes()[0] - 1e-8).abs() < 1e-20);
    let p = make_grid(100, 1e-4, Grading::Power { q: 2.0 }).unwrap();
    assert!((p.nodes()[49] - 0.25).abs() < 1e-14);
    assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
    assert!(make_grid(16, 1.5, Grading::Geometric).is_err());
}

#[test]
fn discrete_laplacian_on_constants_and_quadratics() {
    let grid = Arc::new(make_grid(200, 1e-6, Grading::Geometric).unwrap());
    let lap = discrete_laplacian(grid.clone(), 5).unwrap();
    let ones = vec![1.0; grid.len()];
    assert!(lap.apply(&ones).unwrap().iter().all(|v| v.abs() < 1e-9));
    let sq = grid.sample(|r| r * r);
    for v in lap.apply(&sq).unwrap() {
        assert!((v - 10.0).abs() < 1e-8 * 10.0, "{v}");
    }
}

#[test]
fn dirichlet_eigenvalue_of_three_ball() {
    let grid = Arc::new(make_grid(2000, 1e-4, Grading::Power { q: 1.0 }).unwrap());
    let e = dirichlet_laplacian_smallest(3, grid).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((e.mu / pi2 - 1.0).abs() < 1e-3, "{}", e.mu);
    assert!(e.eigenfunction.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn quadrature_examples() {
    let r_min = 1e-4;
    let g = make_grid(4000, r_min, Grading::Geometric).unwrap();
    let one = vec![1.0; g.len()];
    let exact = (1.0 - r_min.powi(5)) / 5.0;
    assert!((integrate_radial(&one, &g, 5).unwrap() / exact - 1.0).abs() < 1e-4);
    let r = g.sample(|r| r);
    let exact = (1.0 - r_min.powi(3)) / 3.0;
    assert!((integrate_radial(&r, &g, 2).unwrap() / exact - 1.0).abs() < 1e-4);

    let g = make_grid(10_000, 1e-8, Grading::Geometric).unwrap();
    let f = g.sample(|r| r.powf(-8.0 / 3.0));
    let exact = (1.0 - 1e-8f64.powf(19.0 / 3.0)) * 3.0 / 19.0;
    assert!((integrate_radial(&f, &g, 9).unwrap() / exact - 1.0).abs() < 5e-3);
    let mut bad = one.clone();
    bad[3] = f64::NAN;
    assert!(integrate_radial(
        &bad,
        &make_grid(4000, r_min, Grading::Geometric).unwrap(),
        5
    )
    .is_err());
}

#[test]
fn key_identity_for_all_dimensions() {
    for n in 5..=40u32 {
        let u1 = &PowerSum::one() - &mono(int(1), q(4, 3));
        let gap = &PowerSum::one() - &u1;
        let lhs = &power_bilaplacian(&u1, n) * &gap.pow(2);
        let nn = int(i64::from(n));
        let lambda_bar = int(8) * (&nn - q(2, 3)) * (&nn - q(8, 3)) / int(9);
        assert_eq!(lhs, PowerSum::constant(lambda_bar), "N = {n}");
    }
}

fn consistency_error(grid: &Arc<RadialGrid>, n: u32, p: &PowerSum) -> f64 {
    let lap = discrete_laplacian(grid.clone(), n).unwrap();
    let u = grid.sample(|r| p.eval(r).unwrap());
    let exact = power_laplacian(p, n).compile();
    lap.apply(&u)
        .unwrap()
        .iter()
        .zip(grid.interior())
        .map(|(a, r)| (a - exact.eval_unchecked(*r)).abs())
        .fold(0.0, f64::max)
}

fn observed_order(e1: f64, e2: f64) -> f64 {
    (e1 / e2).log2()
}

fn arb_power_sum(min_num: i64) -> impl Strategy<Value = PowerSum> {
    prop::collection::vec((-20i64..=20, min_num..=24i64, 1i64..=3), 1..4)
        .prop_map(|v| PowerSum::from_terms(v.into_iter().map(|(c, e, d)| (int(c), q(e, d)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_is_linear(f in arb_power_sum(-12), g in arb_power_sum(-12), a in -9i64..=9, b in -9i64..=9, n in 2u32..=40) {
        let lhs = power_laplacian(&(&f.scale(&int(a)) + &g.scale(&int(b))), n);
        let rhs = &power_laplacian(&f, n).scale(&int(a)) + &power_laplacian(&g, n).scale(&int(b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn terms_stay_canonical(f in arb_power_sum(-12), g in arb_power_sum(-12)) {
        let h = &(&f * &g) - &f;
        prop_assert!(h.terms().windows(2).all(|w| w[0].exponent < w[1].exponent));
        prop_assert!(h.terms().iter().all(|t| t.coeff != int(0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discrete_laplacian_is_second_order(terms in prop::collection::vec((1i64..=9, 2i64..=6), 1..3), n in 2u32..=12) {
        // smooth power sums: even exponents 4, 6, ... plus r²
        let p = PowerSum::from_terms(
            terms.into_iter().map(|(c, k)| (int(c), int(2 * k))).chain([(int(1), int(2))]),
        );
        let g1 = Arc::new(make_grid(200, 1e-6, Grading::Power { q: 1.0 }).unwrap());
        let g2 = Arc::new(make_grid(400, 1e-6, Grading::Power { q: 1.0 }).unwrap());
        let order = observed_order(consistency_error(&g1, n, &p), consistency_error(&g2, n, &p));
        prop_assert!(order >= 1.8, "order {order}");
    }

    #[test]
    fn trapezoid_is_second_order(k in 0i64..=6, n in 2u32..=12) {
        let err = |m: usize| {
            let g = make_grid(m, 1e-6, Grading::Power { q: 1.0 }).unwrap();
            let r0 = g.nodes()[0];
            let p = k as f64;
            let f = g.sample(|r| r.powf(p));
            let s = f64::from(n) + p;
            let exact = (1.0 - r0.powf(s)) / s;
            (integrate_radial(&f, &g, n).unwrap() - exact).abs()
        };
        let order = observed_order(err(100), err(200));
        prop_assert!(order >= 1.9, "order {order}");
    }
}

#[test]
fn exact_values_convert() {
    assert_eq!(to_f64(&q(2025, 16)), 126.5625);
}
