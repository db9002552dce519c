//! Shooting test for positive solutions of
//! `y'' + ((N−1)/r + V'/V) y' + (W/V) y = 0` on `(0, 1)`.
//!
//! The equation is integrated in `s = ln r` for the reduced unknown
//! `z = y / r^ρ`, where `ρ` is the larger indicial root at the origin, so the
//! algebraic growth or decay of `y` does not dominate the step control.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::radial::powersum::to_f64;
use crate::radial::{int, PowerSum, Rational};

use super::weight::{RadialWeight, WeightEvaluator};

#[derive(Clone, Debug)]
pub struct BesselPairSpec {
    pub v: RadialWeight,
    pub w: RadialWeight,
    pub dimension: u32,
    pub radius: f64,
    /// `∫₀ dr / (r^{N−1} V) = ∞`.
    pub inverse_integral_diverges: bool,
    /// `∫₀ r^{N−1} V dr < ∞`.
    pub mass_converges: bool,
}

impl BesselPairSpec {
    pub fn new(v: RadialWeight, w: RadialWeight, dimension: u32) -> Result<Self> {
        let lead = v
            .leading_at_zero()?
            .ok_or_else(|| config("V vanishes identically near the origin"))?;
        if !lead.coeff.is_positive() {
            return Err(config("V must be positive near the origin"));
        }
        // V ~ c r^e, so both integrands are powers of r
        let power = int(i64::from(dimension) - 1) + &lead.exponent;
        Ok(Self {
            v,
            w,
            dimension,
            radius: 1.0,
            inverse_integral_diverges: power >= int(1),
            mass_converges: power > int(-1),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselOptions {
    pub r0: f64,
    pub r_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// A positive verdict needs `min z > positivity_ratio · max z`.
    pub positivity_ratio: f64,
}

impl Default for BesselOptions {
    fn default() -> Self {
        Self {
            r0: 1e-8,
            r_end: 1.0 - 1e-6,
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 2_000_000,
            positivity_ratio: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OdeVerdict {
    /// Numerical evidence of a positive solution on the sampled interval.
    Positive,
    SignChange {
        radius: f64,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSample {
    pub r: f64,
    pub y: f64,
    /// `y / r^ρ`.
    pub reduced: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub samples: Vec<OdeSample>,
    pub verdict: OdeVerdict,
    pub first_sign_change: Option<f64>,
    /// Real part of the indicial exponent used for the reduction.
    pub exponent: f64,
    pub complex_exponents: bool,
    pub steps: usize,
}

struct Coefficients {
    v: WeightEvaluator,
    dv: WeightEvaluator,
    w: WeightEvaluator,
    n: f64,
}

impl Coefficients {
    /// `(p, q)` of `y_ss + p y_s + q y = 0` at `r = e^s`.
    fn at(&self, r: f64) -> (f64, f64) {
        let v = self.v.eval(r);
        let p = self.n - 2.0 + r * self.dv.eval(r) / v;
        let q = r * r * self.w.eval(r) / v;
        (p, q)
    }
}

fn series_parts(s: &crate::radial::Series) -> Option<(Rational, Vec<(Rational, Rational)>)> {
    if s.terms.first().is_some_and(|t| t.exponent.is_negative()) {
        return None;
    }
    let c0 = s.coeff(&Rational::zero()).unwrap_or_else(Rational::zero);
    let rest = s
        .terms
        .iter()
        .filter(|t| t.exponent.is_positive())
        .map(|t| (t.coeff.clone(), t.exponent.clone()))
        .collect();
    Some((c0, rest))
}

/// Integrates the Bessel-pair equation from `r0` with Frobenius data.
pub fn bessel_pair_test(spec: &BesselPairSpec, opts: &BesselOptions) -> Result<OdeSolution> {
    let inconclusive = |reason: &str| OdeSolution {
        samples: Vec::new(),
        verdict: OdeVerdict::Inconclusive {
            reason: reason.to_string(),
        },
        first_sign_change: None,
        exponent: f64::NAN,
        complex_exponents: false,
        steps: 0,
    };
    if !spec.inverse_integral_diverges || !spec.mass_converges {
        return Ok(inconclusive("integrability hypotheses on V fail"));
    }
    let n = spec.dimension;
    let r_pw = PowerSum::monomial(int(1), int(1));
    let r2_pw = PowerSum::monomial(int(1), int(2));
    let dv = spec.v.derivative();
    let p_series = dv.mul_power_sum(&r_pw).div(&spec.v)?.series_at_zero(3)?;
    let q_series = if spec.w.is_zero() {
        crate::radial::Series {
            terms: Vec::new(),
            horizon: None,
        }
    } else {
        spec.w
            .mul_power_sum(&r2_pw)
            .div(&spec.v)?
            .series_at_zero(3)?
    };
    let (Some((p0, p_rest)), Some((q0, q_rest))) =
        (series_parts(&p_series), series_parts(&q_series))
    else {
        return Ok(inconclusive("irregular singular point at the origin"));
    };
    let p0 = to_f64(&p0) + f64::from(n) - 2.0;
    let q0 = to_f64(&q0);
    let disc = p0 * p0 - 4.0 * q0;
    let complex = disc < 0.0;
    let rho = if complex {
        -0.5 * p0
    } else {
        0.5 * (-p0 + disc.sqrt())
    };

    // first correction r^δ of y = r^ρ (1 + c r^δ + ...)
    let mut delta: Option<Rational> = None;
    for (_, e) in p_rest.iter().chain(&q_rest) {
        if delta.as_ref().is_none_or(|d| e < d) {
            delta = Some(e.clone());
        }
    }
    let (mut z0, mut zs0) = (1.0, 0.0);
    if let (Some(d), false) = (&delta, complex) {
        let pick = |v: &[(Rational, Rational)]| {
            v.iter()
                .find(|(_, e)| e == d)
                .map_or(0.0, |(c, _)| to_f64(c))
        };
        let (pd, qd) = (pick(&p_rest), pick(&q_rest));
        let df = to_f64(d);
        let x = rho + df;
        let f = x * x + p0 * x + q0;
        if f.abs() > 1e-12 {
            let c = -(pd * rho + qd) / f;
            let t = c * opts.r0.powf(df);
            z0 = 1.0 + t;
            zs0 = t * df;
        }
    }

    let coeffs = Coefficients {
        v: spec.v.evaluator(),
        dv: dv.evaluator(),
        w: spec.w.evaluator(),
        n: f64::from(n),
    };
    let rhs = |s: f64, z: [f64; 2]| -> [f64; 2] {
        let (p, q) = coeffs.at(s.exp());
        [
            z[1],
            -(2.0 * rho + p) * z[1] - (rho * rho + p * rho + q) * z[0],
        ]
    };

    let s0 = opts.r0.ln();
    let s1 = (opts.r_end * spec.radius).ln();
    let mut s = s0;
    let mut z = [z0, zs0];
    let mut h = 1e-3 * (s1 - s0);
    let mut samples = vec![OdeSample {
        r: opts.r0,
        y: z0 * opts.r0.powf(rho),
        reduced: z0,
    }];
    let mut steps = 0usize;
    let mut sign_change: Option<f64> = None;
    while s < s1 {
        if steps >= opts.max_steps {
            return Ok(OdeSolution {
                verdict: OdeVerdict::Inconclusive {
                    reason: "step budget exhausted".into(),
                },
                samples,
                first_sign_change: None,
                exponent: rho,
                complex_exponents: complex,
                steps,
            });
        }
        if h < 1e-14 * (1.0 + s.abs()) {
            return Ok(OdeSolution {
                verdict: OdeVerdict::Inconclusive {
                    reason: format!("step underflow at r = {:e}", s.exp()),
                },
                samples,
                first_sign_change: None,
                exponent: rho,
                complex_exponents: complex,
                steps,
            });
        }
        let h_try = h.min(s1 - s);
        let (z_new, err) = dopri_step(&rhs, s, z, h_try);
        let scale = opts.atol
            + opts.rtol
                * z[0]
                    .abs()
                    .max(z_new[0].abs())
                    .max(z[1].abs().max(z_new[1].abs()));
        let ratio = err / scale;
        steps += 1;
        if ratio <= 1.0 {
            let s_new = s + h_try;
            if z[0] > 0.0 && z_new[0] <= 0.0 || z[0] < 0.0 && z_new[0] >= 0.0 {
                let root = hermite_root(s, z, s_new, z_new);
                sign_change = Some(root.exp());
            }
            s = s_new;
            z = z_new;
            let r = s.exp();
            samples.push(OdeSample {
                r,
                y: z[0] * r.powf(rho),
                reduced: z[0],
            });
            if sign_change.is_some() {
                break;
            }
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = h_try * factor;
        if !z[0].is_finite() {
            return Ok(OdeSolution {
                verdict: OdeVerdict::Inconclusive {
                    reason: "solution overflow".into(),
                },
                samples,
                first_sign_change: None,
                exponent: rho,
                complex_exponents: complex,
                steps,
            });
        }
    }
    let verdict = match sign_change {
        Some(r) => OdeVerdict::SignChange { radius: r },
        None => {
            let (mn, mx) = samples
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
                    (a.min(x.reduced), b.max(x.reduced))
                });
            if mn > opts.positivity_ratio * mx {
                OdeVerdict::Positive
            } else {
                OdeVerdict::Inconclusive {
                    reason: format!("solution nearly vanishes (min {mn:e}, max {mx:e})"),
                }
            }
        }
    };
    Ok(OdeSolution {
        samples,
        verdict,
        first_sign_change: sign_change,
        exponent: rho,
        complex_exponents: complex,
        steps,
    })
}

/// One Dormand–Prince 5(4) step; returns the 5th-order value and the error norm.
fn dopri_step<F: Fn(f64, [f64; 2]) -> [f64; 2]>(
    f: &F,
    t: f64,
    y: [f64; 2],
    h: f64,
) -> ([f64; 2], f64) {
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    k[0] = f(t, y);
    for i in 0..6 {
        let mut yi = y;
        for j in 0..=i {
            yi[0] += h * A[i][j] * k[j][0];
            yi[1] += h * A[i][j] * k[j][1];
        }
        k[i + 1] = f(t + C[i] * h, yi);
    }
    let mut y5 = y;
    let mut e = [0.0; 2];
    for i in 0..7 {
        for d in 0..2 {
            y5[d] += h * B5[i] * k[i][d];
            e[d] += h * (B5[i] - B4[i]) * k[i][d];
        }
    }
    (y5, e[0].abs().max(e[1].abs()))
}

/// Zero of the cubic Hermite interpolant of `z` on `[a, b]` by bisection.
fn hermite_root(a: f64, za: [f64; 2], b: f64, zb: [f64; 2]) -> f64 {
    let h = b - a;
    let eval = |t: f64| {
        let x = (t - a) / h;
        let h00 = 2.0 * x.powi(3) - 3.0 * x * x + 1.0;
        let h10 = x.powi(3) - 2.0 * x * x + x;
        let h01 = -2.0 * x.powi(3) + 3.0 * x * x;
        let h11 = x.powi(3) - x * x;
        h00 * za[0] + h10 * h * za[1] + h01 * zb[0] + h11 * h * zb[1]
    };
    let (mut lo, mut hi) = (a, b);
    let s_lo = eval(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
