//! Exact sums of real powers `Σ cᵢ r^{pᵢ}` with rational coefficients and exponents.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn q(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as an exact rational.
pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub exponent: Rational,
}

/// A finite sum of powers of `r`, kept sorted by increasing exponent with
/// like powers merged and zero coefficients dropped.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PowerSum {
    terms: Vec<Term>,
}

impl PowerSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, Rational::zero())
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn monomial(coeff: Rational, exponent: Rational) -> Self {
        Self::from_terms([(coeff, exponent)])
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut raw: Vec<Term> = terms
            .into_iter()
            .map(|(coeff, exponent)| Term { coeff, exponent })
            .collect();
        raw.sort_by(|a, b| a.exponent.cmp(&b.exponent));
        let mut merged: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            match merged.last_mut() {
                Some(last) if last.exponent == t.exponent => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term with the smallest exponent (dominant as `r → 0`).
    pub fn leading_term(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn min_exponent(&self) -> Option<&Rational> {
        self.terms.first().map(|t| &t.exponent)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    exponent: t.exponent.clone(),
                })
                .collect(),
        }
    }

    /// Multiply by `r^p`.
    pub fn shift(&self, p: &Rational) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.clone(),
                    exponent: &t.exponent + p,
                })
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| (&t.coeff * &t.exponent, &t.exponent - Rational::one())),
        )
    }

    /// Radial Laplacian in dimension `n`: `Δ r^p = p (p + n − 2) r^{p−2}`.
    pub fn laplacian(&self, n: u32) -> Self {
        let shift = int(i64::from(n) - 2);
        let two = int(2);
        Self::from_terms(self.terms.iter().map(|t| {
            (
                &t.coeff * &t.exponent * (&t.exponent + &shift),
                &t.exponent - &two,
            )
        }))
    }

    pub fn bilaplacian(&self, n: u32) -> Self {
        self.laplacian(n).laplacian(n)
    }

    /// Exact value at `r = 1`.
    pub fn value_at_one(&self) -> Rational {
        self.terms
            .iter()
            .fold(Rational::zero(), |acc, t| acc + &t.coeff)
    }

    /// Exact limit as `r → 0⁺`, or `None` when a negative power makes it infinite.
    pub fn value_at_zero(&self) -> Option<Rational> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            if t.exponent.is_negative() {
                return None;
            }
            if t.exponent.is_zero() {
                acc += &t.coeff;
            }
        }
        Some(acc)
    }

    /// Smallest `k` such that the `k`-th derivative is nonzero at `r = 1`.
    /// Returns `None` for the zero sum.
    pub fn order_at_one(&self) -> Option<(u32, Rational)> {
        if self.is_zero() {
            return None;
        }
        let mut d = self.clone();
        // A sum of `n` distinct powers cannot vanish to order `n` at 1.
        for k in 0..=self.terms.len() as u32 {
            let v = d.value_at_one();
            if !v.is_zero() {
                return Some((k, v));
            }
            d = d.derivative();
        }
        None
    }

    pub fn compile(&self) -> CompiledPowerSum {
        CompiledPowerSum {
            coeffs: self.terms.iter().map(|t| to_f64(&t.coeff)).collect(),
            exponents: self.terms.iter().map(|t| to_f64(&t.exponent)).collect(),
        }
    }

    /// Floating-point evaluation with compensated summation.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.compile().eval(r)
    }
}

/// Floating-point image of a [`PowerSum`] for repeated evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPowerSum {
    coeffs: Vec<f64>,
    exponents: Vec<f64>,
}

impl CompiledPowerSum {
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("power sum evaluated at r = {r}")));
        }
        if r == 0.0 && self.exponents.iter().any(|&p| p < 0.0) {
            return Err(Error::Domain(
                "negative power evaluated at r = 0".to_string(),
            ));
        }
        Ok(self.eval_unchecked(r))
    }

    /// Evaluation without the domain check, for `r > 0`.
    pub fn eval_unchecked(&self, r: f64) -> f64 {
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for (&c, &p) in self.coeffs.iter().zip(&self.exponents) {
            let x = if p == 0.0 { c } else { c * r.powf(p) };
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }
}

impl Add for &PowerSum {
    type Output = PowerSum;
    fn add(self, rhs: &PowerSum) -> PowerSum {
        PowerSum::from_terms(
            self.terms
                .iter()
                .chain(&rhs.terms)
                .map(|t| (t.coeff.clone(), t.exponent.clone())),
        )
    }
}

impl Sub for &PowerSum {
    type Output = PowerSum;
    fn sub(self, rhs: &PowerSum) -> PowerSum {
        self + &(-rhs)
    }
}

impl Neg for &PowerSum {
    type Output = PowerSum;
    fn neg(self) -> PowerSum {
        PowerSum {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff.clone(),
                    exponent: t.exponent.clone(),
                })
                .collect(),
        }
    }
}

impl Mul for &PowerSum {
    type Output = PowerSum;
    fn mul(self, rhs: &PowerSum) -> PowerSum {
        PowerSum::from_terms(self.terms.iter().flat_map(|a| {
            rhs.terms
                .iter()
                .map(move |b| (&a.coeff * &b.coeff, &a.exponent + &b.exponent))
        }))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PowerSum {
            type Output = PowerSum;
            fn $m(self, rhs: PowerSum) -> PowerSum {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PowerSum {
    type Output = PowerSum;
    fn neg(self) -> PowerSum {
        -&self
    }
}

impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coeff)?;
            } else {
                write!(f, "({})*r^({})", t.coeff, t.exponent)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: String,
    exponent: String,
}

impl Serialize for PowerSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|t| TermRepr {
                coeff: t.coeff.to_string(),
                exponent: t.exponent.to_string(),
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PowerSum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<TermRepr>::deserialize(d)?;
        let mut terms = Vec::with_capacity(v.len());
        for t in v {
            let c: Rational = t.coeff.parse().map_err(serde::de::Error::custom)?;
            let p: Rational = t.exponent.parse().map_err(serde::de::Error::custom)?;
            terms.push((c, p));
        }
        Ok(PowerSum::from_terms(terms))
    }
}

/// Truncated generalized power series about `r = 0`.
///
/// Terms are exact. `horizon` is the exponent from which on coefficients are
/// unknown; `None` means the series is a finite exact sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub terms: Vec<Term>,
    pub horizon: Option<Rational>,
}

impl Series {
    pub fn exact(p: &PowerSum) -> Self {
        Self {
            terms: p.terms.clone(),
            horizon: None,
        }
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// Coefficient of `r^e`, or `None` if `e` lies beyond the horizon.
    pub fn coeff(&self, e: &Rational) -> Option<Rational> {
        if let Some(h) = &self.horizon {
            if e >= h {
                return None;
            }
        }
        Some(
            self.terms
                .iter()
                .find(|t| &t.exponent == e)
                .map(|t| t.coeff.clone())
                .unwrap_or_else(Rational::zero),
        )
    }

    fn clip(mut self) -> Self {
        if let Some(h) = &self.horizon {
            self.terms.retain(|t| &t.exponent < h);
        }
        self
    }

    pub fn add(&self, other: &Series) -> Series {
        let horizon = match (&self.horizon, &other.horizon) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let sum = PowerSum::from_terms(
            self.terms
                .iter()
                .chain(&other.terms)
                .map(|t| (t.coeff.clone(), t.exponent.clone())),
        );
        Series {
            terms: sum.terms,
            horizon,
        }
        .clip()
    }

    pub fn add_constant(&self, c: &Rational) -> Series {
        self.add(&Series::exact(&PowerSum::constant(c.clone())))
    }

    pub fn mul(&self, other: &Series) -> Series {
        let (Some(a0), Some(b0)) = (self.leading(), other.leading()) else {
            let horizon = match (&self.horizon, &other.horizon) {
                (None, None) => None,
                _ => Some(Rational::zero()),
            };
            return Series {
                terms: Vec::new(),
                horizon,
            };
        };
        let mut horizon: Option<Rational> = None;
        let mut bump = |h: Rational| {
            horizon = Some(match horizon.take() {
                Some(x) => x.min(h),
                None => h,
            });
        };
        if let Some(h) = &other.horizon {
            bump(&a0.exponent + h);
        }
        if let Some(h) = &self.horizon {
            bump(&b0.exponent + h);
        }
        let prod = &PowerSum {
            terms: self.terms.clone(),
        } * &PowerSum {
            terms: other.terms.clone(),
        };
        Series {
            terms: prod.terms,
            horizon,
        }
        .clip()
    }

    /// Long division `self / other` producing at most `k` quotient terms.
    pub fn div(&self, other: &Series, k: usize) -> Result<Series> {
        let b0 = other
            .leading()
            .ok_or_else(|| Error::Domain("series division by zero".into()))?
            .clone();
        let a0 = match self.leading() {
            Some(t) => t.exponent.clone(),
            None => {
                return Ok(Series {
                    terms: Vec::new(),
                    horizon: self.horizon.as_ref().map(|h| h - &b0.exponent),
                })
            }
        };
        let mut horizon: Option<Rational> = self.horizon.as_ref().map(|h| h - &b0.exponent);
        if let Some(hb) = &other.horizon {
            let h = &a0 + hb - &b0.exponent - &b0.exponent;
            horizon = Some(match horizon {
                Some(x) => x.min(h),
                None => h,
            });
        }
        let divisor = PowerSum {
            terms: other.terms.clone(),
        };
        let mut rem = PowerSum {
            terms: self.terms.clone(),
        };
        let mut out = Vec::new();
        while out.len() < k {
            let Some(lead) = rem.leading_term().cloned() else {
                break;
            };
            let e = &lead.exponent - &b0.exponent;
            if let Some(h) = &horizon {
                if &e >= h {
                    break;
                }
            }
            let c = &lead.coeff / &b0.coeff;
            rem = &rem - &divisor.shift(&e).scale(&c);
            out.push(Term {
                coeff: c,
                exponent: e,
            });
        }
        if out.len() == k {
            if let Some(lead) = rem.leading_term() {
                let e = &lead.exponent - &b0.exponent;
                horizon = Some(match horizon {
                    Some(x) => x.min(e),
                    None => e,
                });
            }
        }
        Ok(Series {
            terms: out,
            horizon,
        }
        .clip())
    }
}

/// Leading `k` terms of `num / den` about `r = 0`.
pub fn series_at_zero(num: &PowerSum, den: &PowerSum, k: usize) -> Result<Series> {
    Series::exact(num).div(&Series::exact(den), k)
}

/// Serde adapter storing a [`Rational`] as its `"p/q"` string.
pub mod rational_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let t = String::deserialize(d)?;
        t.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_square_is_constant() {
        for n in 2..12u32 {
            let p = PowerSum::monomial(int(1), int(2));
            assert_eq!(p.laplacian(n), PowerSum::constant(int(2 * n as i64)));
        }
    }

    #[test]
    fn bilaplacian_singular_profile() {
        let n = 9u32;
        let u = PowerSum::from_terms([(int(1), int(0)), (int(-1), q(4, 3))]);
        let lam_bar = q(8, 9) * (int(9) - q(2, 3)) * (int(9) - q(8, 3));
        assert_eq!(u.bilaplacian(n), PowerSum::monomial(lam_bar, q(-8, 3)));
    }

    #[test]
    fn order_at_one() {
        // r^2 - r^{N/2}: simple zero at 1
        let p = PowerSum::from_terms([(int(1), int(2)), (int(-1), q(9, 2))]);
        let (k, v) = p.order_at_one().unwrap();
        assert_eq!(k, 1);
        assert_eq!(v, int(2) - q(9, 2));
    }

    #[test]
    fn negative_power_at_origin_is_domain_error() {
        let p = PowerSum::monomial(int(1), int(-1));
        assert!(p.eval(0.0).is_err());
        assert!(PowerSum::monomial(int(3), int(0)).eval(0.0).is_ok());
    }

    #[test]
    fn series_long_division() {
        // 1 / (1 - r) = 1 + r + r^2 + ...
        let num = PowerSum::one();
        let den = PowerSum::from_terms([(int(1), int(0)), (int(-1), int(1))]);
        let s = series_at_zero(&num, &den, 3).unwrap();
        assert_eq!(s.terms.len(), 3);
        for (i, t) in s.terms.iter().enumerate() {
            assert_eq!(t.coeff, int(1));
            assert_eq!(t.exponent, int(i as i64));
        }
        assert_eq!(s.horizon, Some(int(3)));
    }

    #[test]
    fn serde_round_trip() {
        let p = PowerSum::from_terms([(q(3, 7), q(-5, 2)), (int(2), int(1))]);
        let s = serde_json::to_string(&p).unwrap();
        let back: PowerSum = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }
}
