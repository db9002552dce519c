use std::f64::consts::PI;
use std::sync::Arc;

use navier_mems::branch::{minimal_solution, IterationOptions, ProblemParams};
use navier_mems::hardy_rellich::classical_weight;
use navier_mems::linalg::EigenOptions;
use navier_mems::radial::{int, integrate_radial, make_grid, Grading, RadialGrid, RadialLaplacian};
use navier_mems::stability::{
    is_stable, mode_constant, mu1_of_solution, navier_eigen_smallest, rayleigh_min_mode, Numerator,
    Potential,
};
use proptest::prelude::*;

fn uniform(m: usize) -> Arc<RadialGrid> {
    Arc::new(make_grid(m, 1e-4, Grading::Power { q: 1.0 }).unwrap())
}

fn geometric(m: usize, r_min: f64) -> Arc<RadialGrid> {
    Arc::new(make_grid(m, r_min, Grading::Geometric).unwrap())
}

fn mu(params: &ProblemParams, grid: Arc<RadialGrid>, p: Potential<'_>) -> f64 {
    navier_eigen_smallest(params, grid, p).unwrap().mu
}

#[test]
fn three_ball_bilaplacian() {
    // Navier data decouple into two Dirichlet problems: μ = (π²)²
    let p = ProblemParams::new(3, 1.0, 0.0).unwrap();
    let exact = PI.powi(4);
    let e = navier_eigen_smallest(&p, uniform(2000), Potential::Zero).unwrap();
    assert!((e.mu / exact - 1.0).abs() < 5e-3, "{}", e.mu);
    let err = |m| (mu(&p, uniform(m), Potential::Zero) - exact).abs();
    let order = (err(500) / err(1000)).log2();
    assert!(order >= 1.8, "order {order}");
}

#[test]
fn eigenfunction_shape() {
    let p = ProblemParams::new(7, 1.0, 2.0).unwrap();
    let g = geometric(1500, 1e-6);
    let e = navier_eigen_smallest(&p, g.clone(), Potential::Zero).unwrap();
    assert_eq!(e.mode_index, 0);
    assert_eq!(*e.eigenfunction.values.last().unwrap(), 0.0);
    assert!(e.eigenfunction.values.iter().all(|v| *v >= 0.0));
    let sq: Vec<f64> = e.eigenfunction.values.iter().map(|v| v * v).collect();
    let norm = integrate_radial(&sq, &g, 7).unwrap();
    assert!((norm - 1.0).abs() < 1e-2, "{norm}");
    let opts = EigenOptions::default();
    assert!(e.residual <= opts.residual_atol + opts.residual_rtol * e.mu.abs());
    assert_eq!(e.summary().mu, e.mu);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn constant_potential_shifts_spectrum(c in -500.0f64..500.0, n in 2u32..=12, tau in 0.0f64..3.0) {
        let p = ProblemParams::new(n, 1.0, tau).unwrap();
        let g = geometric(400, 1e-5);
        let base = mu(&p, g.clone(), Potential::Zero);
        let shifted = mu(&p, g, Potential::Constant(c));
        prop_assert!((shifted - (base - c)).abs() <= 1e-10 * base.abs().max(c.abs()), "{base} {shifted} {c}");
    }

    #[test]
    fn beta_scales_spectrum(n in 2u32..=12, beta in 0.2f64..5.0) {
        let g = geometric(400, 1e-5);
        let one = mu(&ProblemParams::new(n, beta, 0.0).unwrap(), g.clone(), Potential::Zero);
        let two = mu(&ProblemParams::new(n, 2.0 * beta, 0.0).unwrap(), g, Potential::Zero);
        prop_assert!((two / one - 2.0).abs() < 1e-8);
    }
}

#[test]
fn tension_raises_spectrum() {
    let g = geometric(800, 1e-6);
    let a = mu(
        &ProblemParams::new(5, 1.0, 0.0).unwrap(),
        g.clone(),
        Potential::Zero,
    );
    let b = mu(
        &ProblemParams::new(5, 1.0, 10.0).unwrap(),
        g,
        Potential::Zero,
    );
    assert!(b > a && a > 0.0);
}

#[test]
fn quadratic_form_link() {
    // μ₁ ‖h‖² is the discrete quadratic form at the minimizer
    let p = ProblemParams::new(9, 1.0, 0.0).unwrap();
    let g = geometric(1000, 1e-6);
    let pt = minimal_solution(&p, g.clone(), 200.0, &IterationOptions::default()).unwrap();
    let (stable, e) = is_stable(&p, &pt).unwrap();
    assert!(stable);
    let lap = RadialLaplacian::new(g.clone(), 9).unwrap();
    let h = &e.eigenfunction.values;
    let dh = lap.apply(h).unwrap();
    let u = &pt.profile.values;
    let (mut q, mut mass) = (0.0, 0.0);
    for i in 0..dh.len() {
        let v = lap.volume(i);
        let pot = 2.0 * pt.lambda / (1.0 - u[i]).powi(3);
        q += v * (dh[i] * dh[i] - pot * h[i] * h[i]);
        mass += v * h[i] * h[i];
    }
    assert!(q >= 0.0);
    assert!(
        (q / mass / e.mu - 1.0).abs() < 1e-6,
        "{} {}",
        q / mass,
        e.mu
    );

    let zero = minimal_solution(&p, g, 0.0, &IterationOptions::default()).unwrap();
    let e0 = mu1_of_solution(&p, &zero).unwrap();
    assert!(e0.mu > e.mu && e0.mu > 0.0);
}

#[test]
fn rayleigh_quotient_is_homogeneous_in_weight() {
    let g = geometric(1000, 1e-8);
    let w = classical_weight(9).unwrap();
    let a = rayleigh_min_mode(9, 0, &w, g.clone(), Numerator::Laplacian).unwrap();
    let b = rayleigh_min_mode(9, 0, &w.scale(&int(2)), g, Numerator::Laplacian).unwrap();
    assert!((b.quotient * 2.0 / a.quotient - 1.0).abs() < 1e-8);
    assert_eq!(*a.minimizer.last().unwrap(), 0.0);
}

#[test]
fn higher_modes_are_larger() {
    let g = geometric(1000, 1e-8);
    let w = classical_weight(10).unwrap();
    let qs: Vec<f64> = (0..=3)
        .map(|k| {
            rayleigh_min_mode(10, k, &w, g.clone(), Numerator::Laplacian)
                .unwrap()
                .quotient
        })
        .collect();
    assert!(qs.windows(2).all(|p| p[0] <= p[1]), "{qs:?}");
    let with_tension =
        rayleigh_min_mode(10, 0, &w, g, Numerator::LaplacianWithGradient { tau: 1.0 }).unwrap();
    assert!(with_tension.quotient > qs[0]);
    assert_eq!(mode_constant(10, 2), 20.0);
}
