//! Hardy-Rellich weights and their numerical verification.

pub mod bessel;
pub mod verify;
pub mod weight;

pub use bessel::{
    bessel_pair_test, BesselOptions, BesselPairSpec, OdeSample, OdeSolution, OdeVerdict,
};
pub use verify::{
    verify_weight_rayleigh, verify_weight_rayleigh_with, ModeQuotient, RayleighReport,
    DEFAULT_TOLERANCE,
};
pub use weight::{
    alpha_n, auxiliary_k, auxiliary_phi, classical_weight, first_order_boundary_weight,
    hardy_rellich_constant, improved_weight_31, improved_weight_32, EndpointLimit, RadialWeight,
    RationalTerm, Verification, WeightChoice, WeightEvaluator,
};

use crate::error::Result;
use crate::radial::{int, q, PowerSum};

/// `V = 1/(r² − αr^{N/2+1})`, the gradient weight behind the improved inequalities.
pub fn boundary_gradient_weight(n: u32) -> Result<RadialWeight> {
    let den = &PowerSum::monomial(int(1), int(2))
        - &PowerSum::monomial(alpha_n(n), q(i64::from(n), 2) + int(1));
    RadialWeight::new(
        "boundary_gradient",
        vec![RationalTerm::new(PowerSum::one(), den)],
    )
}

/// `W₁ = (N−4)²/(4(r² − r^{N/2})(r² − αr^{N/2+1}))`, paired with [`boundary_gradient_weight`].
pub fn paired_weight_w1(n: u32) -> Result<RadialWeight> {
    let ni = i64::from(n);
    let two = PowerSum::monomial(int(1), int(2));
    let d1 = &two - &PowerSum::monomial(int(1), q(ni, 2));
    let d2 = &two - &PowerSum::monomial(alpha_n(n), q(ni, 2) + int(1));
    RadialWeight::new(
        "w1",
        vec![RationalTerm::new(
            PowerSum::constant(q((ni - 4) * (ni - 4), 4)),
            &d1 * &d2,
        )],
    )
}
