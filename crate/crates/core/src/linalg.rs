//! Banded linear algebra: tridiagonal LU, symmetric banded `LDLᵀ` with
//! inertia counts, and a bracketed inverse iteration for the lowest eigenpair.

use crate::error::{Error, Result};

/// General tridiagonal matrix stored by rows.
#[derive(Clone, Debug)]
pub struct Tridiag {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

/// LU factors of a [`Tridiag`] without pivoting.
#[derive(Clone, Debug)]
pub struct TridiagLu {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiag {
    /// `lower[0]` and `upper[n−1]` are ignored.
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, diag, upper }
    }

    pub fn factor(&self) -> Result<TridiagLu> {
        let n = self.diag.len();
        let mut inv_pivot = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut piv = self.diag[0];
        for i in 0..n {
            if i > 0 {
                mult[i] = self.lower[i] * inv_pivot[i - 1];
                piv = self.diag[i] - mult[i] * self.upper[i - 1];
            }
            if !(piv.abs() > 0.0) || !piv.is_finite() {
                return Err(Error::Solver(format!("zero pivot in tridiagonal row {i}")));
            }
            inv_pivot[i] = 1.0 / piv;
        }
        Ok(TridiagLu {
            lower: mult,
            inv_pivot,
            upper: self.upper.clone(),
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

impl TridiagLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= self.lower[i] * y[i - 1];
        }
        y[n - 1] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - self.upper[i] * y[i + 1]) * self.inv_pivot[i];
        }
        y
    }
}

/// Symmetric banded matrix; `bands[d][i]` holds `A[i + d][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBand {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bands = (0..=bandwidth)
            .map(|d| vec![0.0; n.saturating_sub(d)])
            .collect();
        Self { n, bands }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn diag(&self) -> &[f64] {
        &self.bands[0]
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.bands.get(i - j).map_or(0.0, |b| b[j])
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.bands[i - j][j] += v;
    }

    pub fn add_diag(&mut self, d: &[f64]) {
        for (a, b) in self.bands[0].iter_mut().zip(d) {
            *a += b;
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.bands {
            b.iter_mut().for_each(|x| *x *= c);
        }
        out
    }

    /// `self + other`, widening the band if needed.
    pub fn plus(&self, other: &SymBand) -> Self {
        let bw = self.bandwidth().max(other.bandwidth());
        let mut out = Self::zeros(self.n, bw);
        for src in [self, other] {
            for (d, b) in src.bands.iter().enumerate() {
                for (j, v) in b.iter().enumerate() {
                    out.bands[d][j] += v;
                }
            }
        }
        out
    }

    /// `D A D` for a diagonal `D`.
    pub fn congruence(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (k, b) in out.bands.iter_mut().enumerate() {
            for (j, v) in b.iter_mut().enumerate() {
                *v *= d[j] * d[j + k];
            }
        }
        out
    }

    /// `A²`, which is symmetric with twice the bandwidth.
    pub fn square(&self) -> Self {
        let bw = self.bandwidth();
        let n = self.n;
        let mut out = Self::zeros(n, 2 * bw);
        for i in 0..n {
            let hi = (i + 2 * bw).min(n - 1);
            for j in i..=hi {
                let k0 = j.saturating_sub(bw);
                let k1 = (i + bw).min(n - 1);
                let mut s = 0.0;
                for k in k0..=k1 {
                    s += self.get(i, k) * self.get(k, j);
                }
                out.bands[j - i][i] = s;
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, b) in self.bands.iter().enumerate().skip(1) {
            for (j, v) in b.iter().enumerate() {
                y[j + d] += v * x[j];
                y[j] += v * x[j + d];
            }
        }
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// Gershgorin lower bound for the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut radius = vec![0.0; self.n];
        for b in self.bands.iter().skip(1) {
            let d = self.n - b.len();
            for (j, v) in b.iter().enumerate() {
                radius[j] += v.abs();
                radius[j + d] += v.abs();
            }
        }
        self.bands[0]
            .iter()
            .zip(&radius)
            .map(|(a, r)| a - r)
            .fold(f64::INFINITY, f64::min)
    }

    /// `LDLᵀ` factorization of `A − σI` without pivoting.
    pub fn ldlt(&self, sigma: f64) -> Ldlt {
        let n = self.n;
        let bw = self.bandwidth();
        let mut d = vec![0.0; n];
        // l[k][j] = L[j + k][j] for k = 1..=bw
        let mut l: Vec<Vec<f64>> = (0..=bw).map(|k| vec![0.0; n.saturating_sub(k)]).collect();
        for i in 0..n {
            let k0 = i.saturating_sub(bw);
            let mut di = self.bands[0][i] - sigma;
            for k in k0..i {
                let lik = l[i - k][k];
                di -= lik * lik * d[k];
            }
            if di == 0.0 {
                // exact breakdown; a row-scaled nudge keeps the count well defined
                di = f64::EPSILON * (self.bands[0][i].abs() + sigma.abs()).max(f64::MIN_POSITIVE);
            }
            d[i] = di;
            for j in i + 1..=(i + bw).min(n - 1) {
                let mut s = self.bands[j - i][i];
                for k in j.saturating_sub(bw)..i {
                    s -= l[j - k][k] * l[i - k][k] * d[k];
                }
                l[j - i][i] = s / di;
            }
        }
        Ldlt { d, l }
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        self.ldlt(sigma).negative_pivots()
    }
}

#[derive(Clone, Debug)]
pub struct Ldlt {
    d: Vec<f64>,
    l: Vec<Vec<f64>>,
}

impl Ldlt {
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|x| **x < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let bw = self.l.len() - 1;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(bw)..i {
                y[i] -= self.l[i - k][k] * y[k];
            }
        }
        for (v, d) in y.iter_mut().zip(&self.d) {
            *v /= d;
        }
        for i in (0..n).rev() {
            for j in i + 1..=(i + bw).min(n - 1) {
                y[i] -= self.l[j - i][i] * y[j];
            }
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::radial::compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Relative width at which bisection stops.
    pub bracket_rtol: f64,
    /// Residual tolerance `‖(A − μ)x‖ ≤ abs + rel·|μ|`.
    pub residual_rtol: f64,
    pub residual_atol: f64,
    pub max_iterations: usize,
    pub max_restarts: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            bracket_rtol: 1e-11,
            residual_rtol: 1e-6,
            residual_atol: 1e-10,
            max_iterations: 60,
            max_restarts: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    /// Unit vector with nonnegative component sum.
    pub vector: Vec<f64>,
    /// Shift-invert residual `‖b/‖x‖ − (μ − σ) x̂‖`.
    pub residual: f64,
    /// Directly formed `‖A x̂ − μ x̂‖`, limited by round-off in `A`.
    pub explicit_residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub restarts: usize,
}

/// `LDLᵀ` of a shifted operator, with the number of its eigenvalues below
/// the shift.
#[derive(Clone, Debug)]
pub struct ShiftedFactor {
    ldlt: Ldlt,
    augmented: bool,
}

impl ShiftedFactor {
    pub fn count_below(&self) -> usize {
        let neg = self.ldlt.negative_pivots();
        if self.augmented {
            // the auxiliary block contributes exactly n negative directions
            neg.saturating_sub(self.ldlt.d.len() / 2)
        } else {
            neg
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        if !self.augmented {
            return self.ldlt.solve(b);
        }
        // augmented unknowns are stored in reverse node order
        let n = b.len();
        let mut rhs = vec![0.0; 2 * n];
        for (i, v) in b.iter().enumerate() {
            rhs[2 * (n - 1 - i) + 1] = *v;
        }
        let z = self.ldlt.solve(&rhs);
        (0..n).map(|i| z[2 * (n - 1 - i) + 1]).collect()
    }
}

/// Symmetric operator whose lowest eigenpair can be found by bracketed
/// shift-invert iteration.
pub trait SpectralOperator {
    fn dim(&self) -> usize;
    /// Any lower bound for the spectrum.
    fn lower_bound(&self) -> f64;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn factor(&self, sigma: f64) -> ShiftedFactor;

    fn rayleigh(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }

    fn count_below(&self, sigma: f64) -> usize {
        self.factor(sigma).count_below()
    }
}

impl SpectralOperator for SymBand {
    fn dim(&self) -> usize {
        self.n
    }

    fn lower_bound(&self) -> f64 {
        self.gershgorin_lower()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn factor(&self, sigma: f64) -> ShiftedFactor {
        ShiftedFactor {
            ldlt: self.ldlt(sigma),
            augmented: false,
        }
    }
}

/// `A = D(βS² + τS)D − diag(p)` for a tridiagonal, positive semidefinite `S`
/// and a positive diagonal `D`.
///
/// Shifted systems are factored through the block matrix
/// `[[D(τS)D − p − σ, √β DS], [√β SD, −I]]`, interleaved so it stays banded.
/// Its Schur complement is `A − σ`, and its entries stay on the scale of `S`
/// rather than `S²`, which keeps inertia counts reliable on graded grids.
#[derive(Clone, Debug)]
pub struct SquareOperator {
    s: SymBand,
    d: Vec<f64>,
    beta: f64,
    tau: f64,
    p: Vec<f64>,
}

impl SquareOperator {
    pub fn new(
        s: SymBand,
        d: Option<Vec<f64>>,
        beta: f64,
        tau: f64,
        p: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = s.dim();
        if s.bandwidth() != 1 {
            return Err(Error::Solver(
                "square operator needs a tridiagonal factor".into(),
            ));
        }
        let d = d.unwrap_or_else(|| vec![1.0; n]);
        let p = p.unwrap_or_else(|| vec![0.0; n]);
        if d.len() != n || p.len() != n {
            return Err(Error::Solver("square operator dimensions disagree".into()));
        }
        Ok(Self { s, d, beta, tau, p })
    }

    /// `√β S D x`, the auxiliary variable of the block form.
    fn half(&self, x: &[f64]) -> Vec<f64> {
        let dx: Vec<f64> = x.iter().zip(&self.d).map(|(a, b)| a * b).collect();
        self.s.matvec(&dx)
    }

    /// The explicitly formed band matrix (bandwidth 2).
    pub fn assemble(&self) -> SymBand {
        let mut a = self
            .s
            .square()
            .scaled(self.beta)
            .plus(&self.s.scaled(self.tau))
            .congruence(&self.d);
        a.add_diag(&self.p.iter().map(|v| -v).collect::<Vec<_>>());
        a
    }
}

impl SpectralOperator for SquareOperator {
    fn dim(&self) -> usize {
        self.s.dim()
    }

    fn lower_bound(&self) -> f64 {
        -self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let sdx = self.half(x);
        let ssdx = self.s.matvec(&sdx);
        (0..x.len())
            .map(|i| self.d[i] * (self.beta * ssdx[i] + self.tau * sdx[i]) - self.p[i] * x[i])
            .collect()
    }

    fn rayleigh(&self, x: &[f64]) -> f64 {
        let dx: Vec<f64> = x.iter().zip(&self.d).map(|(a, b)| a * b).collect();
        let sdx = self.s.matvec(&dx);
        let pot: f64 =
            crate::radial::compensated_sum(x.iter().zip(&self.p).map(|(v, p)| p * v * v));
        self.beta * dot(&sdx, &sdx) + self.tau * dot(&dx, &sdx) - pot
    }

    fn factor(&self, sigma: f64) -> ShiftedFactor {
        // Unknowns (v, h) interleaved and numbered from r = 1 inward. On
        // graded grids the large entries then enter last and the pivots stay
        // accurate; eliminating from the origin outward loses ε‖S‖² in them.
        let n = self.dim();
        let rb = self.beta.sqrt();
        let pos = |i: usize| 2 * (n - 1 - i);
        let mut m = SymBand::zeros(2 * n, 3);
        for i in 0..n {
            let (v, h) = (pos(i), pos(i) + 1);
            m.add(v, v, -1.0);
            let sii = self.s.get(i, i);
            m.add(
                h,
                h,
                self.tau * sii * self.d[i] * self.d[i] - self.p[i] - sigma,
            );
            m.add(h, v, rb * sii * self.d[i]);
            if i + 1 < n {
                let s = self.s.get(i + 1, i);
                let (v1, h1) = (pos(i + 1), pos(i + 1) + 1);
                m.add(h, h1, self.tau * s * self.d[i] * self.d[i + 1]);
                m.add(h, v1, rb * s * self.d[i]);
                m.add(v, h1, rb * s * self.d[i + 1]);
            }
        }
        ShiftedFactor {
            ldlt: m.ldlt(0.0),
            augmented: true,
        }
    }
}

fn bisect(a: &dyn SpectralOperator, mut lo: f64, mut hi: f64, rtol: f64) -> (f64, f64) {
    for _ in 0..400 {
        let width = hi - lo;
        if width <= rtol * lo.abs().max(hi.abs()) || width <= f64::MIN_POSITIVE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a.count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Lowest eigenpair of a symmetric operator by bisection on inertia counts
/// followed by shift-invert iteration.
pub fn smallest_eigenpair(
    a: &dyn SpectralOperator,
    start: &[f64],
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let n = a.dim();
    if n == 0 || start.len() != n {
        return Err(Error::Spectral {
            message: "empty operator or mismatched start vector".into(),
            last_estimate: f64::NAN,
        });
    }
    let s0 = norm2(start);
    if !(s0 > 0.0) {
        return Err(Error::Spectral {
            message: "zero start vector".into(),
            last_estimate: f64::NAN,
        });
    }
    let mut b: Vec<f64> = start.iter().map(|x| x / s0).collect();

    let mut lo = a.lower_bound();
    let mut hi = a.rayleigh(&b);
    hi += hi.abs() * 1e-9 + f64::MIN_POSITIVE;
    let mut grow = 0;
    while a.count_below(hi) == 0 {
        hi += hi.abs().max(1.0);
        grow += 1;
        if grow > 64 {
            return Err(Error::Spectral {
                message: "failed to bracket the lowest eigenvalue".into(),
                last_estimate: hi,
            });
        }
    }
    if lo >= hi {
        lo = hi - hi.abs().max(1.0);
    }
    let mut rtol = opts.bracket_rtol;
    let mut last = f64::NAN;
    let mut total_iterations = 0;
    for restart in 0..=opts.max_restarts {
        (lo, hi) = bisect(a, lo, hi, rtol);
        let sigma = lo;
        let fac = a.factor(sigma);
        for it in 0..opts.max_iterations {
            total_iterations += 1;
            let x = fac.solve(&b);
            let nx = norm2(&x);
            if !nx.is_finite() || nx == 0.0 {
                break;
            }
            let xh: Vec<f64> = x.iter().map(|v| v / nx).collect();
            let theta = a.rayleigh(&xh);
            last = theta;
            let resid: Vec<f64> = b
                .iter()
                .zip(&xh)
                .map(|(bi, xi)| bi / nx - (theta - sigma) * xi)
                .collect();
            let res = norm2(&resid);
            b = xh;
            let guard = opts.residual_atol + opts.residual_rtol * theta.abs();
            if res <= guard && it > 0 {
                if a.count_below(theta - guard) != 0 {
                    return Err(Error::Spectral {
                        message: "inverse iteration settled above the lowest eigenvalue".into(),
                        last_estimate: theta,
                    });
                }
                let ax = a.apply(&b);
                let explicit: Vec<f64> = ax.iter().zip(&b).map(|(p, x)| p - theta * x).collect();
                if b.iter().sum::<f64>() < 0.0 {
                    b.iter_mut().for_each(|x| *x = -*x);
                }
                return Ok(EigenPair {
                    value: theta,
                    vector: b,
                    residual: res,
                    explicit_residual: norm2(&explicit),
                    bracket: (lo, hi),
                    iterations: total_iterations,
                    restarts: restart,
                });
            }
        }
        rtol *= 1e-2;
    }
    Err(Error::Spectral {
        message: "inverse iteration did not converge".into(),
        last_estimate: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SymBand {
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn inertia_matches_known_spectrum() {
        let n = 50;
        let a = laplace_1d(n);
        let eig = |k: usize| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert_eq!(a.count_below(0.5 * (eig(3) + eig(4))), 3);
        let start = vec![1.0; n];
        let p = smallest_eigenpair(&a, &start, &EigenOptions::default()).unwrap();
        assert!((p.value - eig(1)).abs() < 1e-12);
        assert!(p.vector.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn square_matches_dense() {
        let a = laplace_1d(6);
        let s = a.square();
        for i in 0..6 {
            for j in 0..6 {
                let dense: f64 = (0..6).map(|k| a.get(i, k) * a.get(k, j)).sum();
                assert!((s.get(i, j) - dense).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tridiagonal_solve() {
        let t = Tridiag::new(
            vec![0.0, -1.0, -1.0],
            vec![4.0, 4.0, 4.0],
            vec![-1.0, -2.0, 0.0],
        );
        let x = vec![1.0, -2.0, 3.0];
        let b = t.matvec(&x);
        let got = t.factor().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }
}
