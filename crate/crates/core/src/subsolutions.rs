//! Singular sub-solutions `w_m = 1 − a r^{4/3} + b r^m` and their certificates.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::BranchResult;
use crate::error::{config, Error, Result};
use crate::hardy_rellich::{
    hardy_rellich_constant, verify_weight_rayleigh, RadialWeight, WeightChoice,
};
use crate::radial::powersum::to_f64;
use crate::radial::{int, make_grid, q, Grading, GridDescriptor, PowerSum, RadialGrid, Rational};

/// `λ̄ = 8(N − 2/3)(N − 8/3)/9`.
pub fn lambda_bar(n: u32) -> Rational {
    let n = int(i64::from(n));
    q(8, 9) * (&n - q(2, 3)) * (&n - q(8, 3))
}

/// `H_N = N²(N−4)²/16`.
pub fn h_n(n: u32) -> Rational {
    hardy_rellich_constant(n)
}

/// `2λ̄ ≤ H_N`, the dimension test on the singular side.
pub fn regularity_criterion(n: u32) -> bool {
    int(2) * lambda_bar(n) <= h_n(n)
}

/// `(a_{N,m}, b_{N,m})` with `a − b = 1`.
pub fn coefficients(n: u32, m: &Rational) -> Result<(Rational, Rational)> {
    if m <= &q(4, 3) {
        return Err(config(format!("exponent m = {m} must exceed 4/3")));
    }
    let ni = int(i64::from(n));
    let top = m * (&ni + m - int(2));
    let c = q(4, 3) * (&ni - q(2, 3));
    let d = &top - &c;
    if !d.is_positive() {
        return Err(config(format!(
            "invalid pair N = {n}, m = {m}: denominator {d} is not positive"
        )));
    }
    Ok((&top / &d, &c / &d))
}

/// `1 − a r^{4/3} + b r^m`.
pub fn profile(n: u32, m: &Rational) -> Result<PowerSum> {
    let (a, b) = coefficients(n, m)?;
    Ok(PowerSum::from_terms([
        (Rational::one(), Rational::zero()),
        (-a, q(4, 3)),
        (b, m.clone()),
    ]))
}

/// Which row rule of the sub-solution table is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableCase {
    /// `N = 9`: `m = 14/5` with the `K`-weight.
    Nine,
    /// `10 ≤ N ≤ 15`: `m = 3` with the two-term improved weight.
    Explicit,
    /// `16 ≤ N ≤ 30`: `m = 3`, `λ′ = H_N/2 − 1`, `σ = H_N/2`.
    MidRange,
    /// `N ≥ 31`: `m = 2`, `λ′ = 27λ̄`, `σ = H_N/2`.
    HighRange,
}

const EXPLICIT_ROWS: [(u32, i64, i64); 7] = [
    (9, 249, 251),
    (10, 320, 367),
    (11, 405, 574),
    (12, 502, 851),
    (13, 610, 1211),
    (14, 730, 1668),
    (15, 860, 2235),
];

impl TableCase {
    pub fn default_for(n: u32) -> Option<Self> {
        match n {
            9 => Some(Self::Nine),
            10..=15 => Some(Self::Explicit),
            16..=30 => Some(Self::MidRange),
            31.. => Some(Self::HighRange),
            _ => None,
        }
    }

    pub fn exponent(self) -> Rational {
        match self {
            Self::Nine => q(14, 5),
            Self::Explicit | Self::MidRange => int(3),
            Self::HighRange => int(2),
        }
    }

    pub fn weight(self) -> WeightChoice {
        match self {
            Self::Nine => WeightChoice::Improved32,
            Self::Explicit => WeightChoice::Improved31,
            Self::MidRange | Self::HighRange => WeightChoice::Classical,
        }
    }

    /// `(λ′, σ)` for dimension `n`, when the rule defines it there.
    pub fn constants(self, n: u32) -> Option<(Rational, Rational)> {
        let half_h = h_n(n) / int(2);
        match self {
            Self::Nine | Self::Explicit => EXPLICIT_ROWS
                .iter()
                .find(|(d, _, _)| *d == n)
                .map(|(_, l, s)| (int(*l), int(*s))),
            Self::MidRange => Some((&half_h - int(1), half_h)),
            Self::HighRange => Some((int(27) * lambda_bar(n), half_h)),
        }
    }
}

/// The tabulated `λ′_N` for `N ≥ 9`.
pub fn table_lambda_prime(n: u32) -> Option<Rational> {
    TableCase::default_for(n)
        .and_then(|c| c.constants(n))
        .map(|(l, _)| l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubSolutionSpec {
    pub dimension: u32,
    #[serde(with = "crate::radial::powersum::rational_str")]
    pub m: Rational,
    #[serde(with = "crate::radial::powersum::rational_str")]
    pub a: Rational,
    #[serde(with = "crate::radial::powersum::rational_str")]
    pub b: Rational,
    pub profile: PowerSum,
    #[serde(with = "crate::radial::powersum::rational_str")]
    pub lambda_prime: Rational,
    #[serde(with = "crate::radial::powersum::rational_str")]
    pub sigma: Rational,
    pub weight: WeightChoice,
    pub case: Option<TableCase>,
}

impl SubSolutionSpec {
    pub fn new(
        n: u32,
        m: Rational,
        lambda_prime: Rational,
        sigma: Rational,
        weight: WeightChoice,
    ) -> Result<Self> {
        let (a, b) = coefficients(n, &m)?;
        let profile = profile(n, &m)?;
        Ok(Self {
            dimension: n,
            m,
            a,
            b,
            profile,
            lambda_prime,
            sigma,
            weight,
            case: None,
        })
    }

    pub fn for_case(n: u32, case: TableCase) -> Result<Self> {
        let (l, s) = case
            .constants(n)
            .ok_or_else(|| config(format!("rule {case:?} has no constants for N = {n}")))?;
        let mut spec = Self::new(n, case.exponent(), l, s, case.weight())?;
        spec.case = Some(case);
        Ok(spec)
    }

    pub fn table(n: u32) -> Result<Self> {
        let case = TableCase::default_for(n)
            .ok_or_else(|| config(format!("the sub-solution table starts at N = 9, got {n}")))?;
        Self::for_case(n, case)
    }

    /// `1 − w_m = a r^{4/3} − b r^m`, formed symbolically.
    pub fn gap(&self) -> PowerSum {
        &PowerSum::one() - &self.profile
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub value: String,
    pub approx: f64,
}

impl ExactValue {
    pub fn new(v: &Rational) -> Self {
        Self {
            value: v.to_string(),
            approx: to_f64(v),
        }
    }
}

/// Limit of a margin as `r → 0⁺`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OriginLimit {
    Finite(ExactValue),
    PlusInfinity,
    MinusInfinity,
}

impl OriginLimit {
    fn from_leading(offset: &Rational, lead: Option<(&Rational, &Rational)>, sign: i32) -> Self {
        // margin = offset + sign·(c r^e) as r → 0
        match lead {
            None => Self::Finite(ExactValue::new(offset)),
            Some((_, e)) if e.is_positive() => Self::Finite(ExactValue::new(offset)),
            Some((c, e)) if e.is_zero() => {
                let v = if sign > 0 { offset + c } else { offset - c };
                Self::Finite(ExactValue::new(&v))
            }
            Some((c, _)) => {
                if (c.is_positive()) == (sign > 0) {
                    Self::PlusInfinity
                } else {
                    Self::MinusInfinity
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Self::Finite(v) => v.approx > 0.0,
            Self::PlusInfinity => true,
            Self::MinusInfinity => false,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Self::Finite(v) => v.approx >= 0.0,
            Self::PlusInfinity => true,
            Self::MinusInfinity => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    /// Smallest sampled margin.
    pub min: f64,
    pub argmin: f64,
    pub samples: usize,
    pub origin_limit: OriginLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `λ′ − Δ²u (1−u)²` on all nodes.
    pub pde: MarginSummary,
    /// `W (1−u)³ − 2σ` on nodes with `r < 1`.
    pub stability: MarginSummary,
    /// `W (1−u)³ − 2σ` as `r → 1⁻`.
    pub stability_at_one: crate::hardy_rellich::EndpointLimit,
    pub bc_value: ExactValue,
    pub bc_laplacian: ExactValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideCondition {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Violated {
        condition: String,
        location: f64,
        margin: f64,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    #[serde(rename = "N")]
    pub dimension: u32,
    pub m: ExactValue,
    pub a: ExactValue,
    pub b: ExactValue,
    pub lambda_prime: ExactValue,
    pub sigma: ExactValue,
    pub weight: String,
    pub weight_verified: bool,
    pub case: Option<TableCase>,
    pub margins: Margins,
    pub singular: bool,
    pub profile_in_unit_interval: bool,
    pub side_conditions: Vec<SideCondition>,
    /// All sampled margins and origin limits are strictly positive.
    pub strict: bool,
    pub grid: GridDescriptor,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub grid_nodes: usize,
    pub r_min: f64,
    /// Grid used to verify the Hardy-Rellich weight.
    pub verify_nodes: usize,
    pub verify_k_max: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_nodes: 20_000,
            r_min: 1e-8,
            verify_nodes: 4000,
            verify_k_max: 3,
        }
    }
}

impl CertifyOptions {
    pub fn grid(&self) -> Result<RadialGrid> {
        make_grid(self.grid_nodes, self.r_min, Grading::Geometric)
    }
}

fn sampled_min<F: Fn(f64) -> f64>(nodes: &[f64], f: F) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, f64::NAN);
    for &r in nodes {
        let v = f(r);
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite margin {v} at r = {r:e}")));
        }
        if v < best.0 {
            best = (v, r);
        }
    }
    Ok(best)
}

/// Pointwise certificate for the sub-solution and stability conditions.
pub fn certify(
    spec: &SubSolutionSpec,
    weight: &RadialWeight,
    grid: &RadialGrid,
) -> Result<CertificateReport> {
    certify_with_tension(spec, weight, grid, &Rational::zero(), &spec.lambda_prime)
}

/// As [`certify`], for `Δ²u − ρΔu ≤ λ″/(1−u)²` instead of `Δ²u ≤ λ′/(1−u)²`.
pub fn certify_with_tension(
    spec: &SubSolutionSpec,
    weight: &RadialWeight,
    grid: &RadialGrid,
    rho: &Rational,
    lambda: &Rational,
) -> Result<CertificateReport> {
    let n = spec.dimension;
    let u = &spec.profile;
    let gap = spec.gap();
    let lap = u.laplacian(n);
    let operator = &u.bilaplacian(n) - &lap.scale(rho);
    let pde = &operator * &gap.pow(2);
    let two_sigma = int(2) * &spec.sigma;

    let pde_c = pde.compile();
    let lam = to_f64(lambda);
    let (pde_min, pde_arg) = sampled_min(grid.nodes(), |r| lam - pde_c.eval_unchecked(r))?;
    let pde_lead = pde.leading_term().map(|t| (&t.coeff, &t.exponent));
    let pde_origin = OriginLimit::from_leading(lambda, pde_lead, -1);

    let stab = weight.mul_power_sum(&gap.pow(3));
    let stab_ev = stab.evaluator();
    let ts = to_f64(&two_sigma);
    let open = grid.interior();
    let (st_min, st_arg) = sampled_min(open, |r| stab_ev.eval(r) - ts)?;
    let st_lead = stab.leading_at_zero()?;
    let st_origin = OriginLimit::from_leading(
        &(-two_sigma.clone()),
        st_lead.as_ref().map(|t| (&t.coeff, &t.exponent)),
        1,
    );
    let stab_shift = stab.plus(&RadialWeight::from_power_sum(
        "shift",
        PowerSum::constant(-two_sigma.clone()),
    )?);
    let at_one = stab_shift.limit_at_one();

    let bc_value = u.value_at_one();
    let bc_lap = lap.value_at_one();
    let singular = u.value_at_zero() == Some(Rational::one())
        && gap
            .leading_term()
            .is_some_and(|t| t.exponent.is_positive() && t.coeff.is_positive());
    let uc = u.compile();
    let in_unit = grid.nodes().iter().all(|&r| {
        let v = uc.eval_unchecked(r);
        (-1e-12..=1.0 + 1e-12).contains(&v)
    });

    let mut side = vec![SideCondition {
        name: "sigma_exceeds_lambda".into(),
        holds: &spec.sigma > lambda,
    }];
    if spec.case == Some(TableCase::HighRange) {
        let lb = lambda_bar(n);
        side.push(SideCondition {
            name: "a_below_three".into(),
            holds: spec.a < int(3),
        });
        side.push(SideCondition {
            name: "a_cubed_lambda_bar_within_27_lambda_bar".into(),
            holds: spec.a.pow(3) * &lb <= int(27) * &lb,
        });
        side.push(SideCondition {
            name: "27_lambda_bar_below_half_h".into(),
            holds: int(27) * &lb < h_n(n) / int(2),
        });
    }

    let weight_verified = weight.verification.is_some();
    let strict =
        pde_min > 0.0 && st_min > 0.0 && pde_origin.is_positive() && st_origin.is_positive();
    let verdict = if pde_min < 0.0 {
        Verdict::Violated {
            condition: "pde".into(),
            location: pde_arg,
            margin: pde_min,
        }
    } else if !pde_origin.is_nonnegative() {
        Verdict::Violated {
            condition: "pde_origin".into(),
            location: 0.0,
            margin: f64::NEG_INFINITY,
        }
    } else if st_min < 0.0 {
        Verdict::Violated {
            condition: "stability".into(),
            location: st_arg,
            margin: st_min,
        }
    } else if !st_origin.is_nonnegative() {
        Verdict::Violated {
            condition: "stability_origin".into(),
            location: 0.0,
            margin: f64::NEG_INFINITY,
        }
    } else if !at_one.is_nonnegative() {
        Verdict::Violated {
            condition: "stability_endpoint".into(),
            location: 1.0,
            margin: match &at_one {
                crate::hardy_rellich::EndpointLimit::Finite { approx, .. } => *approx,
                _ => f64::NEG_INFINITY,
            },
        }
    } else if !bc_value.is_zero() || !bc_lap.is_zero() {
        Verdict::Violated {
            condition: "boundary".into(),
            location: 1.0,
            margin: to_f64(&bc_value).abs().max(to_f64(&bc_lap).abs()),
        }
    } else if let Some(s) = side.iter().find(|s| !s.holds) {
        Verdict::Violated {
            condition: s.name.clone(),
            location: f64::NAN,
            margin: f64::NAN,
        }
    } else if !singular || !in_unit {
        Verdict::Violated {
            condition: "profile".into(),
            location: f64::NAN,
            margin: f64::NAN,
        }
    } else if !weight_verified {
        Verdict::Inconclusive {
            reason: format!("weight {} has not been verified", weight.name),
        }
    } else {
        Verdict::Certified
    };

    Ok(CertificateReport {
        dimension: n,
        m: ExactValue::new(&spec.m),
        a: ExactValue::new(&spec.a),
        b: ExactValue::new(&spec.b),
        lambda_prime: ExactValue::new(lambda),
        sigma: ExactValue::new(&spec.sigma),
        weight: weight.name.clone(),
        weight_verified,
        case: spec.case,
        margins: Margins {
            pde: MarginSummary {
                min: pde_min,
                argmin: pde_arg,
                samples: grid.len(),
                origin_limit: pde_origin,
            },
            stability: MarginSummary {
                min: st_min,
                argmin: st_arg,
                samples: open.len(),
                origin_limit: st_origin,
            },
            stability_at_one: at_one,
            bc_value: ExactValue::new(&bc_value),
            bc_laplacian: ExactValue::new(&bc_lap),
        },
        singular,
        profile_in_unit_interval: in_unit,
        side_conditions: side,
        strict,
        grid: grid.descriptor(),
        verdict,
    })
}

/// Builds and verifies the weight named by `spec`, then certifies.
pub fn certify_spec(spec: &SubSolutionSpec, opts: &CertifyOptions) -> Result<CertificateReport> {
    let weight = spec.weight.build(spec.dimension)?;
    let vgrid = std::sync::Arc::new(make_grid(
        opts.verify_nodes,
        opts.r_min,
        Grading::Geometric,
    )?);
    let report = verify_weight_rayleigh(spec.dimension, &weight, opts.verify_k_max, vgrid)?;
    let weight = report.verified_weight(weight);
    certify(spec, &weight, &opts.grid()?)
}

/// Certificate for the table row of dimension `n`.
pub fn table1_verify(n: u32, opts: &CertifyOptions) -> Result<CertificateReport> {
    certify_spec(&SubSolutionSpec::table(n)?, opts)
}

/// Certificates for a range of dimensions, computed concurrently, in order.
pub fn table1_verify_range(dims: &[u32], opts: &CertifyOptions) -> Vec<Result<CertificateReport>> {
    dims.par_iter().map(|&n| table1_verify(n, opts)).collect()
}

/// Largest `ρ = τ/β` with `−ρΔu ≤ (λ″ − λ′)/(1−u)²` on the sampled grid.
/// Returns `f64::INFINITY` when `−Δu ≤ 0` everywhere.
pub fn tau_beta_margin(
    spec: &SubSolutionSpec,
    lambda_dd: &Rational,
    grid: &RadialGrid,
) -> Result<f64> {
    if lambda_dd < &spec.lambda_prime || lambda_dd >= &spec.sigma {
        return Err(config("need lambda' <= lambda'' < sigma"));
    }
    let slack = to_f64(&(lambda_dd - &spec.lambda_prime));
    let gap = spec.gap();
    // (1−u)² (−Δu), with −Δu = Δ(1−u)
    let g = &gap.pow(2) * &gap.laplacian(spec.dimension);
    if let Some(t) = g.leading_term() {
        if t.exponent.is_negative() && t.coeff.is_positive() {
            return Ok(0.0);
        }
    }
    let gc = g.compile();
    let nodes = grid.nodes();
    let (mut best, mut idx) = (f64::NEG_INFINITY, 0usize);
    for (i, &r) in nodes.iter().enumerate() {
        let v = gc.eval_unchecked(r);
        if v > best {
            best = v;
            idx = i;
        }
    }
    // refine the maximum between the neighbouring nodes
    let (mut lo, mut hi) = (
        nodes[idx.saturating_sub(1)],
        nodes[(idx + 1).min(nodes.len() - 1)],
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if gc.eval_unchecked(x1) < gc.eval_unchecked(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    best = best.max(gc.eval_unchecked(0.5 * (lo + hi)));
    if best <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(slack / best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchdownPoint {
    pub lambda: f64,
    /// `max_r (1 − u(r)) − C r^{4/3}`.
    pub max_slack: f64,
    pub argmax: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchdownReport {
    pub constant: f64,
    pub points: Vec<TouchdownPoint>,
    pub last: Option<TouchdownPoint>,
}

/// Signed slack of `1 − u_λ ≤ C r^{4/3}` with `C = (λ_high/(βλ̄))^{1/3}`.
pub fn touchdown_profile_check(branch: &BranchResult, n: u32, beta: f64) -> TouchdownReport {
    let c = (branch.lambda_star_high / (beta * to_f64(&lambda_bar(n)))).cbrt();
    let points: Vec<TouchdownPoint> = branch
        .points
        .iter()
        .map(|p| {
            let nodes = p.profile.grid.nodes();
            let (mut best, mut arg) = (f64::NEG_INFINITY, f64::NAN);
            for (r, u) in nodes.iter().zip(&p.profile.values) {
                let s = (1.0 - u) - c * r.powf(4.0 / 3.0);
                if s > best {
                    best = s;
                    arg = *r;
                }
            }
            TouchdownPoint {
                lambda: p.lambda,
                max_slack: best,
                argmax: arg,
            }
        })
        .collect();
    TouchdownReport {
        constant: c,
        last: points.last().cloned(),
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        let (a, b) = coefficients(10, &int(3)).unwrap();
        assert_eq!(a, q(297, 185));
        assert_eq!(&a - &b, int(1));
        let (a, _) = coefficients(31, &int(2)).unwrap();
        assert_eq!(a, q(279, 97));
    }

    #[test]
    fn criterion_examples() {
        assert_eq!(lambda_bar(9), q(3800, 81));
        assert_eq!(h_n(9), q(2025, 16));
        assert!(regularity_criterion(9));
        assert_eq!(lambda_bar(8), q(2816, 81));
        assert!(!regularity_criterion(8));
    }

    #[test]
    fn rejects_small_exponent() {
        assert!(coefficients(9, &q(4, 3)).is_err());
    }
}
