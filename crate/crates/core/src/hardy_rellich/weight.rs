//! Radial weights built from quotients of power sums.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{int, powersum::to_f64, q, CompiledPowerSum, PowerSum, Rational, Series, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalTerm {
    pub num: PowerSum,
    pub den: PowerSum,
}

impl RationalTerm {
    pub fn new(num: PowerSum, den: PowerSum) -> Self {
        Self { num, den }
    }
}

/// How a weight was checked numerically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub method: String,
    pub grid_nodes: usize,
    pub r_min: f64,
    pub min_quotient: f64,
    pub tolerance: f64,
    pub modes: u32,
}

/// Behaviour of a weight as `r → 1⁻`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointLimit {
    Finite { value: String, approx: f64 },
    PlusInfinity { pole_order: u32 },
    MinusInfinity { pole_order: u32 },
    Indeterminate,
}

impl EndpointLimit {
    fn finite(v: Rational) -> Self {
        Self::Finite {
            approx: to_f64(&v),
            value: v.to_string(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Self::Finite { approx, .. } => *approx >= 0.0,
            Self::PlusInfinity { .. } => true,
            _ => false,
        }
    }
}

/// Sum of terms `num(r)/den(r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialWeight {
    pub name: String,
    terms: Vec<RationalTerm>,
    #[serde(default)]
    pub verification: Option<Verification>,
}

/// Floating-point evaluator for a [`RadialWeight`].
#[derive(Clone, Debug)]
pub struct WeightEvaluator {
    terms: Vec<(CompiledPowerSum, CompiledPowerSum)>,
}

impl WeightEvaluator {
    pub fn eval(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(n, d)| n.eval_unchecked(r) / d.eval_unchecked(r))
            .sum()
    }
}

const POSITIVITY_SAMPLES: usize = 4000;

impl RadialWeight {
    /// A weight required to be positive on `(0, 1)`; checked by dense sampling
    /// and by the exact leading behaviour at both endpoints.
    pub fn new(name: impl Into<String>, terms: Vec<RationalTerm>) -> Result<Self> {
        let w = Self::unchecked(name, terms)?;
        w.check_positive()?;
        Ok(w)
    }

    /// A weight with no sign requirement.
    pub fn unchecked(name: impl Into<String>, terms: Vec<RationalTerm>) -> Result<Self> {
        let terms: Vec<RationalTerm> = terms.into_iter().filter(|t| !t.num.is_zero()).collect();
        if terms.iter().any(|t| t.den.is_zero()) {
            return Err(Error::InvalidWeight("zero denominator".into()));
        }
        Ok(Self {
            name: name.into(),
            terms,
            verification: None,
        })
    }

    pub fn zero(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            terms: Vec::new(),
            verification: None,
        }
    }

    pub fn from_power_sum(name: impl Into<String>, p: PowerSum) -> Result<Self> {
        Self::unchecked(name, vec![RationalTerm::new(p, PowerSum::one())])
    }

    pub fn terms(&self) -> &[RationalTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluator(&self) -> WeightEvaluator {
        WeightEvaluator {
            terms: self
                .terms
                .iter()
                .map(|t| (t.num.compile(), t.den.compile()))
                .collect(),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("weight evaluated at r = {r}")));
        }
        Ok(self.evaluator().eval(r))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            name: self.name.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| RationalTerm::new(t.num.scale(c), t.den.clone()))
                .filter(|t| !t.num.is_zero())
                .collect(),
            verification: None,
        }
    }

    pub fn mul_power_sum(&self, p: &PowerSum) -> Self {
        Self {
            name: self.name.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| RationalTerm::new(&t.num * p, t.den.clone()))
                .filter(|t| !t.num.is_zero())
                .collect(),
            verification: None,
        }
    }

    pub fn plus(&self, other: &RadialWeight) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self {
            name: format!("{}+{}", self.name, other.name),
            terms,
            verification: None,
        }
    }

    /// Symbolic derivative by the quotient rule.
    pub fn derivative(&self) -> Self {
        Self {
            name: format!("{}'", self.name),
            terms: self
                .terms
                .iter()
                .map(|t| {
                    RationalTerm::new(
                        &(&t.num.derivative() * &t.den) - &(&t.num * &t.den.derivative()),
                        &t.den * &t.den,
                    )
                })
                .filter(|t| !t.num.is_zero())
                .collect(),
            verification: None,
        }
    }

    /// The weight as a single fraction.
    pub fn combined(&self) -> RationalTerm {
        let mut acc = RationalTerm::new(PowerSum::zero(), PowerSum::one());
        for t in &self.terms {
            acc = if acc.den == t.den {
                RationalTerm::new(&acc.num + &t.num, acc.den)
            } else {
                RationalTerm::new(
                    &(&acc.num * &t.den) + &(&t.num * &acc.den),
                    &acc.den * &t.den,
                )
            };
        }
        acc
    }

    /// `1 / self` as a single fraction.
    pub fn recip(&self) -> Result<Self> {
        let c = self.combined();
        if c.num.is_zero() {
            return Err(Error::Domain("reciprocal of the zero weight".into()));
        }
        Self::unchecked(
            format!("1/{}", self.name),
            vec![RationalTerm::new(c.den, c.num)],
        )
    }

    /// Quotient `self / other` as a single fraction.
    pub fn div(&self, other: &RadialWeight) -> Result<Self> {
        let a = self.combined();
        let b = other.combined();
        if b.num.is_zero() {
            return Err(Error::Domain("division by the zero weight".into()));
        }
        Self::unchecked(
            format!("{}/{}", self.name, other.name),
            vec![RationalTerm::new(&a.num * &b.den, &a.den * &b.num)],
        )
    }

    /// First `k` terms of the expansion about `r = 0`.
    pub fn series_at_zero(&self, k: usize) -> Result<Series> {
        let mut acc = Series {
            terms: Vec::new(),
            horizon: None,
        };
        for t in &self.terms {
            let s = Series::exact(&t.num).div(&Series::exact(&t.den), k.max(1))?;
            acc = acc.add(&s);
        }
        acc.terms.truncate(k);
        Ok(acc)
    }

    /// Dominant power `c r^e` as `r → 0`, computed exactly.
    pub fn leading_at_zero(&self) -> Result<Option<Term>> {
        for k in [2usize, 4, 8] {
            let s = self.series_at_zero(k)?;
            if let Some(t) = s.leading() {
                return Ok(Some(t.clone()));
            }
            if s.horizon.is_none() {
                return Ok(None);
            }
        }
        Err(Error::Domain(format!(
            "leading behaviour of {} at the origin cancels beyond the expansion depth",
            self.name
        )))
    }

    /// Exact behaviour as `r → 1⁻`.
    pub fn limit_at_one(&self) -> EndpointLimit {
        let mut finite = Rational::zero();
        let mut plus: Option<u32> = None;
        let mut minus: Option<u32> = None;
        for t in &self.terms {
            let Some((kd, dv)) = t.den.order_at_one() else {
                return EndpointLimit::Indeterminate;
            };
            let Some((kn, nv)) = t.num.order_at_one() else {
                continue;
            };
            if kn >= kd {
                if kn == kd {
                    // ratio of the first nonvanishing derivatives
                    finite += nv / dv;
                }
                continue;
            }
            // (r − 1)^{kn − kd} from the left has sign (−1)^{kd − kn}
            let mut positive = nv.is_positive() == dv.is_positive();
            if (kd - kn) % 2 == 1 {
                positive = !positive;
            }
            let order = kd - kn;
            let slot = if positive { &mut plus } else { &mut minus };
            *slot = Some(slot.map_or(order, |o| o.max(order)));
        }
        match (plus, minus) {
            (None, None) => EndpointLimit::finite(finite),
            (Some(o), None) => EndpointLimit::PlusInfinity { pole_order: o },
            (None, Some(o)) => EndpointLimit::MinusInfinity { pole_order: o },
            (Some(a), Some(b)) if a > b => EndpointLimit::PlusInfinity { pole_order: a },
            (Some(a), Some(b)) if b > a => EndpointLimit::MinusInfinity { pole_order: b },
            _ => EndpointLimit::Indeterminate,
        }
    }

    fn check_positive(&self) -> Result<()> {
        match self.leading_at_zero()? {
            Some(t) if t.coeff.is_positive() => {}
            _ => {
                return Err(Error::InvalidWeight(format!(
                    "{} is not positive near the origin",
                    self.name
                )))
            }
        }
        if !self.limit_at_one().is_nonnegative() {
            return Err(Error::InvalidWeight(format!(
                "{} is negative near r = 1",
                self.name
            )));
        }
        let ev = self.evaluator();
        let (l0, l1) = (1e-8_f64.ln(), (1.0 - 1e-9_f64).ln());
        for i in 0..POSITIVITY_SAMPLES {
            let s = l0 + (l1 - l0) * i as f64 / (POSITIVITY_SAMPLES - 1) as f64;
            let r = s.exp();
            let v = ev.eval(r);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidWeight(format!(
                    "{} is not positive at r = {r:e} (value {v:e})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// `N/(2(N−1))`.
pub fn alpha_n(n: u32) -> Rational {
    q(i64::from(n), 2 * (i64::from(n) - 1))
}

/// `N²(N−4)²/16`.
pub fn hardy_rellich_constant(n: u32) -> Rational {
    let n = i64::from(n);
    q(n * n * (n - 4) * (n - 4), 16)
}

fn r_pow(c: Rational, e: Rational) -> PowerSum {
    PowerSum::monomial(c, e)
}

fn half_n(n: u32) -> Rational {
    q(i64::from(n), 2)
}

/// `r² − αr^{N/2+1}`.
fn boundary_factor_alpha(n: u32) -> PowerSum {
    &r_pow(int(1), int(2)) - &r_pow(alpha_n(n), half_n(n) + int(1))
}

/// `r² − r^{N/2}`.
fn boundary_factor_one(n: u32) -> PowerSum {
    &r_pow(int(1), int(2)) - &r_pow(int(1), half_n(n))
}

/// Classical Rellich weight `H_N / r⁴`.
pub fn classical_weight(n: u32) -> Result<RadialWeight> {
    if n < 5 {
        return Err(Error::WeightConstruction(format!(
            "the Rellich weight needs N >= 5, got {n}"
        )));
    }
    RadialWeight::new(
        "classical",
        vec![RationalTerm::new(
            PowerSum::constant(hardy_rellich_constant(n)),
            r_pow(int(1), int(4)),
        )],
    )
}

/// Improved weight with boundary terms built from `r² − αr^{N/2+1}` and `r² − r^{N/2}`.
pub fn improved_weight_31(n: u32) -> Result<RadialWeight> {
    if n < 5 {
        return Err(Error::WeightConstruction(format!(
            "this improved weight needs N >= 5, got {n}"
        )));
    }
    let ni = i64::from(n);
    let a = q((ni - 2) * (ni - 2) * (ni - 4) * (ni - 4), 16);
    let b = q((ni - 1) * (ni - 4) * (ni - 4), 4);
    RadialWeight::new(
        "improved31",
        vec![
            RationalTerm::new(
                PowerSum::constant(a),
                &boundary_factor_alpha(n) * &boundary_factor_one(n),
            ),
            RationalTerm::new(
                PowerSum::constant(b),
                &r_pow(int(1), int(2)) * &boundary_factor_one(n),
            ),
        ],
    )
}

/// `φ(r) = r^{−N/2+2} + 9r^{−2} + 10r − 20`.
pub fn auxiliary_phi(n: u32) -> PowerSum {
    PowerSum::from_terms([
        (int(1), int(2) - half_n(n)),
        (int(9), int(-2)),
        (int(10), int(1)),
        (int(-20), int(0)),
    ])
}

/// `K = −(φ'' + (N−3)φ'/r)/φ` as a single fraction.
pub fn auxiliary_k(n: u32) -> RationalTerm {
    let phi = auxiliary_phi(n);
    let d1 = phi.derivative();
    let d2 = d1.derivative();
    let num = -&(&d2 + &d1.shift(&int(-1)).scale(&int(i64::from(n) - 3)));
    RationalTerm::new(num, phi)
}

/// Improved weight `K(r)((N−2)²/(4(r² − αr^{N/2+1})) + (N−1)/r²)`.
pub fn improved_weight_32(n: u32) -> Result<RadialWeight> {
    if n < 7 {
        return Err(Error::WeightConstruction(format!(
            "this improved weight needs N >= 7, got {n}"
        )));
    }
    let k = auxiliary_k(n);
    let kw = RadialWeight::unchecked("K", vec![k.clone()])?;
    let phi = RadialWeight::from_power_sum("phi", auxiliary_phi(n))?;
    for (f, label) in [(&phi, "phi"), (&kw, "K")] {
        if let Err(e) = f.check_positive() {
            return Err(Error::WeightConstruction(format!(
                "auxiliary function {label} is not positive on (0, 1) for N = {n}: {e}"
            )));
        }
    }
    let ni = i64::from(n);
    let t1 = RationalTerm::new(
        k.num.scale(&q((ni - 2) * (ni - 2), 4)),
        &k.den * &boundary_factor_alpha(n),
    );
    let t2 = RationalTerm::new(k.num.scale(&int(ni - 1)), k.den.shift(&int(2)));
    RadialWeight::new("improved32", vec![t1, t2])
}

/// First-order weight `(N−2)²/(4(r² − αr^{N/2+1}))`.
pub fn first_order_boundary_weight(n: u32) -> Result<RadialWeight> {
    let ni = i64::from(n);
    RadialWeight::new(
        "first_order_boundary",
        vec![RationalTerm::new(
            PowerSum::constant(q((ni - 2) * (ni - 2), 4)),
            boundary_factor_alpha(n),
        )],
    )
}

/// Named weight choices used by certification and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    Classical,
    Improved31,
    Improved32,
}

impl WeightChoice {
    pub fn build(self, n: u32) -> Result<RadialWeight> {
        match self {
            Self::Classical => classical_weight(n),
            Self::Improved31 => improved_weight_31(n),
            Self::Improved32 => improved_weight_32(n),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Improved31 => "improved31",
            Self::Improved32 => "improved32",
        }
    }
}

impl std::str::FromStr for WeightChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Self::Classical),
            "improved31" | "improved_31" => Ok(Self::Improved31),
            "improved32" | "improved_32" => Ok(Self::Improved32),
            _ => Err(Error::Config(format!("unknown weight '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_leading_term() {
        let w = classical_weight(10).unwrap();
        let t = w.leading_at_zero().unwrap().unwrap();
        assert_eq!(t.exponent, int(-4));
        assert_eq!(t.coeff, hardy_rellich_constant(10));
    }

    #[test]
    fn improved_weights_match_classical_at_origin() {
        for n in 9..=20u32 {
            for w in [
                improved_weight_31(n).unwrap(),
                improved_weight_32(n).unwrap(),
            ] {
                let t = w.leading_at_zero().unwrap().unwrap();
                assert_eq!(t.exponent, int(-4), "{} N={n}", w.name);
                assert_eq!(t.coeff, hardy_rellich_constant(n), "{} N={n}", w.name);
            }
        }
    }

    #[test]
    fn improved32_rejected_in_low_dimensions() {
        for n in 5..=8u32 {
            assert!(matches!(
                improved_weight_32(n),
                Err(Error::WeightConstruction(_))
            ));
        }
    }

    #[test]
    fn endpoint_behaviour() {
        let w = improved_weight_31(10).unwrap();
        assert!(matches!(
            w.limit_at_one(),
            EndpointLimit::PlusInfinity { .. }
        ));
        let c = classical_weight(10).unwrap();
        assert_eq!(
            c.limit_at_one(),
            EndpointLimit::finite(hardy_rellich_constant(10))
        );
    }

    #[test]
    fn derivative_agrees_with_difference_quotient() {
        let w = improved_weight_31(11).unwrap();
        let d = w.derivative();
        for r in [0.1, 0.5, 0.9] {
            let h = 1e-6 * r;
            let fd = (w.eval(r + h).unwrap() - w.eval(r - h).unwrap()) / (2.0 * h);
            let ex = d.eval(r).unwrap();
            assert!(((fd - ex) / ex).abs() < 1e-6, "{fd} {ex}");
        }
    }

    #[test]
    fn combined_matches_terms() {
        let w = improved_weight_31(12).unwrap();
        let c = RadialWeight::unchecked("c", vec![w.combined()]).unwrap();
        for r in [0.05, 0.3, 0.77] {
            let a = w.eval(r).unwrap();
            let b = c.eval(r).unwrap();
            assert!(((a - b) / a).abs() < 1e-12);
        }
    }
}
