//! Minimal branch `λ ↦ u_λ` of `βΔ²u − τΔu = λ/(1−u)²` with Navier data
//! `u = α`, `Δu = γ` at `r = 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, NonConvergenceReason, Result};
use crate::linalg::{Tridiag, TridiagLu};
use crate::radial::{integrate_radial, GridFunction, RadialGrid, RadialLaplacian};
use crate::stability::{self, Potential};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dimension: u32,
    pub beta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl ProblemParams {
    /// Homogeneous Navier data `α = γ = 0`.
    pub fn new(dimension: u32, beta: f64, tau: f64) -> Result<Self> {
        Self::with_boundary(dimension, beta, tau, 0.0, 0.0)
    }

    pub fn with_boundary(
        dimension: u32,
        beta: f64,
        tau: f64,
        alpha: f64,
        gamma: f64,
    ) -> Result<Self> {
        let p = Self {
            dimension,
            beta,
            tau,
            alpha,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(config(format!(
                "dimension must be at least 2, got {}",
                self.dimension
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(config(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if !(self.alpha < 1.0) || !self.alpha.is_finite() {
            return Err(config(format!(
                "boundary value alpha must be below 1, got {}",
                self.alpha
            )));
        }
        if !(self.gamma <= 0.0) || !self.gamma.is_finite() {
            return Err(config(format!(
                "boundary Laplacian gamma must be <= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Output of one linear Navier solve.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub u: Vec<f64>,
    /// `w = −Δu` on all nodes.
    pub w: Vec<f64>,
    /// Componentwise backward error of the two tridiagonal stages.
    pub residual: f64,
}

/// Pre-factored two-stage solver for `βΔ²u − τΔu = f`.
#[derive(Clone, Debug)]
pub struct NavierSolver {
    params: ProblemParams,
    lap: RadialLaplacian,
    stage1: Tridiag,
    stage2: Tridiag,
    lu1: TridiagLu,
    lu2: TridiagLu,
}

impl NavierSolver {
    pub fn new(params: ProblemParams, grid: Arc<RadialGrid>) -> Result<Self> {
        params.validate()?;
        let lap = RadialLaplacian::new(grid, params.dimension)?;
        let (left, right) = lap.row_coefficients();
        let n = lap.len() - 1;
        let build = |scale: f64, shift: f64| {
            Tridiag::new(
                (0..n).map(|i| -scale * left[i]).collect(),
                (0..n)
                    .map(|i| scale * (left[i] + right[i]) + shift)
                    .collect(),
                (0..n).map(|i| -scale * right[i]).collect(),
            )
        };
        let stage1 = build(params.beta, params.tau);
        let stage2 = build(1.0, 0.0);
        let lu1 = stage1.factor()?;
        let lu2 = stage2.factor()?;
        Ok(Self {
            params,
            lap,
            stage1,
            stage2,
            lu1,
            lu2,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.lap.grid()
    }

    pub fn laplacian(&self) -> &RadialLaplacian {
        &self.lap
    }

    /// Solves with right-hand side `f` given at the interior nodes.
    pub fn solve(&self, f: &[f64]) -> Result<LinearSolution> {
        let n = self.lap.len() - 1;
        if f.len() != n {
            return Err(config(format!(
                "{} right-hand side values for {n} interior nodes",
                f.len()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite right-hand side".into()));
        }
        let (_, right) = self.lap.row_coefficients();
        let w_bdry = -self.params.gamma;
        let mut rhs1 = f.to_vec();
        rhs1[n - 1] += self.params.beta * right[n - 1] * w_bdry;
        let mut w = self.lu1.solve(&rhs1);
        let mut rhs2 = w.clone();
        rhs2[n - 1] += right[n - 1] * self.params.alpha;
        let mut u = self.lu2.solve(&rhs2);
        let residual =
            rel_residual(&self.stage1, &w, &rhs1).max(rel_residual(&self.stage2, &u, &rhs2));
        if u.iter().chain(&w).any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution".into()));
        }
        w.push(w_bdry);
        u.push(self.params.alpha);
        Ok(LinearSolution { u, w, residual })
    }

    /// Componentwise backward error of the discrete fourth-order problem
    /// applied to `u` (all nodes), scaled by the magnitude of the composed stencil.
    pub fn fourth_order_residual(&self, u: &[f64], f: &[f64]) -> Result<f64> {
        let (beta, tau) = (self.params.beta, self.params.tau);
        let mut w: Vec<f64> = self.lap.apply(u)?.iter().map(|v| -v).collect();
        w.push(-self.params.gamma);
        let lw = self.lap.apply(&w)?;
        let mut aw = self.lap.apply_abs(u)?;
        aw.push(self.params.gamma.abs());
        let law = self.lap.apply_abs(&aw)?;
        let mut err = 0.0_f64;
        for i in 0..f.len() {
            let a = -beta * lw[i] + tau * w[i];
            let scale = beta * law[i] + tau * aw[i] + f[i].abs();
            let e = (a - f[i]).abs();
            err = err.max(if scale == 0.0 { e } else { e / scale });
        }
        Ok(err)
    }
}

fn rel_residual(a: &Tridiag, x: &[f64], b: &[f64]) -> f64 {
    let n = x.len();
    let ax = a.matvec(x);
    (0..n).fold(0.0_f64, |m, i| {
        let mut scale = (a.diag[i] * x[i]).abs() + b[i].abs();
        if i > 0 {
            scale += (a.lower[i] * x[i - 1]).abs();
        }
        if i + 1 < n {
            scale += (a.upper[i] * x[i + 1]).abs();
        }
        let err = (ax[i] - b[i]).abs();
        if scale == 0.0 {
            m.max(err)
        } else {
            m.max(err / scale)
        }
    })
}

/// One-shot linear solve of `βΔ²u − τΔu = f` with the Navier data in `params`.
pub fn solve_navier_linear(
    params: &ProblemParams,
    f: &GridFunction,
) -> Result<(GridFunction, f64)> {
    let solver = NavierSolver::new(*params, f.grid.clone())?;
    let interior = &f.values[..f.values.len() - 1];
    let sol = solver.solve(interior)?;
    Ok((GridFunction::new(f.grid.clone(), sol.u)?, sol.residual))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    /// Bound on the sup-norm of successive updates.
    pub tol: f64,
    /// Bound on the estimated distance to the fixed point.
    pub error_tol: f64,
    pub max_iter: usize,
    /// Iterates with `sup u > 1 − touchdown_margin` are rejected.
    pub touchdown_margin: f64,
    /// Allowed decrease between successive iterates, relative to `1 + |u|`.
    pub monotonicity_slack: f64,
    /// Consecutive growing updates taken as divergence.
    pub divergence_window: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            error_tol: 1e-8,
            max_iter: 200_000,
            touchdown_margin: 1e-3,
            monotonicity_slack: 1e-12,
            divergence_window: 25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub lambda: f64,
    pub profile: GridFunction,
    /// `w = −Δu` on all nodes.
    pub minus_laplacian: Vec<f64>,
    pub sup_norm: f64,
    pub energy: f64,
    pub inverse_cubed_mass: f64,
    pub mu1: Option<f64>,
    pub iterations: usize,
    /// Estimated distance to the fixed point from the observed contraction.
    pub error_estimate: f64,
    /// Relative residual of the discrete fourth-order equation.
    pub strong_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub lambda: f64,
    pub sup_norm: f64,
    pub energy: f64,
    pub inverse_cubed_mass: f64,
    pub mu1: Option<f64>,
    pub iterations: usize,
}

impl BranchPoint {
    pub fn row(&self) -> BranchRow {
        BranchRow {
            lambda: self.lambda,
            sup_norm: self.sup_norm,
            energy: self.energy,
            inverse_cubed_mass: self.inverse_cubed_mass,
            mu1: self.mu1,
            iterations: self.iterations,
        }
    }
}

fn nonlinearity(lambda: f64, u: &[f64]) -> Vec<f64> {
    u[..u.len() - 1]
        .iter()
        .map(|v| lambda / ((1.0 - v) * (1.0 - v)))
        .collect()
}

fn finish_point(
    solver: &NavierSolver,
    lambda: f64,
    sol: LinearSolution,
    iterations: usize,
    error_estimate: f64,
) -> Result<BranchPoint> {
    let p = solver.params();
    let grid = solver.grid().clone();
    let lap = solver.laplacian();
    let n = p.dimension;
    let grad: f64 = crate::radial::compensated_sum(
        (0..sol.u.len() - 1).map(|j| lap.flux_coefficient(j) * (sol.u[j + 1] - sol.u[j]).powi(2)),
    );
    let w2: Vec<f64> = sol.w.iter().map(|v| v * v).collect();
    let energy = p.tau * grad + p.beta * integrate_radial(&w2, &grid, n)?;
    let inv3: Vec<f64> = sol.u.iter().map(|v| (1.0 - v).powi(-3)).collect();
    let inverse_cubed_mass = integrate_radial(&inv3, &grid, n)?;
    let strong_residual = solver.fourth_order_residual(&sol.u, &nonlinearity(lambda, &sol.u))?;
    let sup_norm = sol.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(BranchPoint {
        lambda,
        profile: GridFunction::new(grid, sol.u)?,
        minus_laplacian: sol.w,
        sup_norm,
        energy,
        inverse_cubed_mass,
        mu1: None,
        iterations,
        error_estimate,
        strong_residual,
    })
}

/// Monotone iteration `βΔ²uₙ − τΔuₙ = λ/(1−u_{n−1})²` from `start`
/// (the homogeneous lifting of the boundary data when `None`).
pub fn minimal_solution_with(
    solver: &NavierSolver,
    lambda: f64,
    start: Option<&[f64]>,
    opts: &IterationOptions,
) -> Result<BranchPoint> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(config(format!("lambda must be nonnegative, got {lambda}")));
    }
    let m = solver.grid().len();
    let mut u: Vec<f64> = match start {
        Some(s) if s.len() == m => s.to_vec(),
        Some(s) => {
            return Err(config(format!(
                "warm start has {} values for {m} nodes",
                s.len()
            )))
        }
        None => solver.solve(&vec![0.0; m - 1])?.u,
    };
    let fail = |reason, iterations, last_sup| Error::NonConvergence {
        lambda,
        reason,
        iterations,
        last_sup,
    };
    let ceiling = 1.0 - opts.touchdown_margin;
    if u.iter().any(|v| !(*v <= ceiling)) {
        return Err(fail(
            NonConvergenceReason::Touchdown,
            0,
            u.iter().copied().fold(f64::MIN, f64::max),
        ));
    }
    let mut prev_delta = f64::INFINITY;
    let mut growing = 0usize;
    for it in 1..=opts.max_iter {
        let sol = solver.solve(&nonlinearity(lambda, &u))?;
        let sup = sol.u.iter().copied().fold(f64::MIN, f64::max);
        if !(sup <= ceiling) {
            return Err(fail(NonConvergenceReason::Touchdown, it, sup));
        }
        let mut delta = 0.0_f64;
        for (new, old) in sol.u.iter().zip(&u) {
            let d = new - old;
            if d < -opts.monotonicity_slack * (1.0 + old.abs()) {
                return Err(fail(NonConvergenceReason::LostMonotonicity, it, sup));
            }
            delta = delta.max(d.abs());
        }
        let rate = delta / prev_delta;
        let estimate = if it == 1 {
            f64::INFINITY
        } else if rate < 1.0 {
            delta * rate / (1.0 - rate)
        } else {
            f64::INFINITY
        };
        if delta > prev_delta {
            growing += 1;
            if growing >= opts.divergence_window {
                return Err(fail(NonConvergenceReason::Diverging, it, sup));
            }
        } else {
            growing = 0;
        }
        let converged = delta == 0.0 || (delta < opts.tol && estimate < opts.error_tol);
        if converged {
            let estimate = if delta == 0.0 { 0.0 } else { estimate };
            return finish_point(solver, lambda, sol, it, estimate);
        }
        prev_delta = delta;
        u = sol.u;
    }
    Err(fail(
        NonConvergenceReason::IterationBudget,
        opts.max_iter,
        u.iter().copied().fold(f64::MIN, f64::max),
    ))
}

pub fn minimal_solution(
    params: &ProblemParams,
    grid: Arc<RadialGrid>,
    lambda: f64,
    opts: &IterationOptions,
) -> Result<BranchPoint> {
    let solver = NavierSolver::new(*params, grid)?;
    minimal_solution_with(&solver, lambda, None, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// `sup (μ₁u + C)(1−u)²` over `(α, 1)`.
    pub eigen_bound: f64,
    pub mu1: f64,
    pub boundary_constant: f64,
    /// Certified sub-solution parameter, when one applies to these parameters.
    pub certified_bound: Option<f64>,
    pub value: f64,
}

/// Maximum of `(μu + C)(1−u)²` over `u ∈ [α, 1]`.
pub fn eigen_bound(mu: f64, c: f64, alpha: f64) -> f64 {
    let g = |u: f64| (mu * u + c) * (1.0 - u).powi(2);
    let mut best = g(alpha).max(0.0);
    let crit = (mu - 2.0 * c) / (3.0 * mu);
    if crit > alpha && crit < 1.0 {
        best = best.max(g(crit));
    }
    best
}

/// Upper bound for the extremal parameter from the first eigenpair of
/// `βΔ² − τΔ`, tightened by the certified table value when applicable.
pub fn lambda_star_upper_bound(
    params: &ProblemParams,
    grid: Arc<RadialGrid>,
) -> Result<UpperBound> {
    let e = stability::navier_eigen_smallest(params, grid.clone(), Potential::Zero)?;
    let mu = e.mu;
    let mut c = -params.alpha * mu;
    if params.gamma != 0.0 {
        let psi = &e.eigenfunction.values;
        let lap = RadialLaplacian::new(grid.clone(), params.dimension)?;
        let mut w: Vec<f64> = lap.apply(psi)?.iter().map(|v| -v).collect();
        // `Δψ = 0` at the boundary for the Navier eigenfunction
        w.push(0.0);
        let iw = integrate_radial(&w, &grid, params.dimension)?;
        let ip = integrate_radial(psi, &grid, params.dimension)?;
        c += params.beta * params.gamma * iw / ip;
    }
    let eb = eigen_bound(mu, c, params.alpha);
    let certified =
        if params.beta == 1.0 && params.tau == 0.0 && params.alpha == 0.0 && params.gamma == 0.0 {
            crate::subsolutions::table_lambda_prime(params.dimension)
                .map(|q| crate::radial::powersum::to_f64(&q))
        } else {
            None
        };
    let value = certified.map_or(eb, |t| t.min(eb));
    Ok(UpperBound {
        eigen_bound: eb,
        mu1: mu,
        boundary_constant: c,
        certified_bound: certified,
        value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationControls {
    pub rel_width: f64,
    pub growth: f64,
    pub max_trials: usize,
    pub compute_mu1: bool,
    pub iteration: IterationOptions,
}

impl Default for ContinuationControls {
    fn default() -> Self {
        Self {
            rel_width: 1e-3,
            growth: 1.5,
            max_trials: 2000,
            compute_mu1: false,
            iteration: IterationOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchResult {
    pub params: ProblemParams,
    pub points: Vec<BranchPoint>,
    pub lambda_star_low: f64,
    pub lambda_star_high: f64,
    pub upper_bound: Option<UpperBound>,
}

impl BranchResult {
    pub fn rows(&self) -> Vec<BranchRow> {
        self.points.iter().map(BranchPoint::row).collect()
    }
}

/// Adaptive continuation in `λ` bracketing the numerical pull-in threshold.
///
/// Without `lambda_start` the walk starts at a tenth of the eigenvalue bound.
pub fn continue_branch(
    params: &ProblemParams,
    grid: Arc<RadialGrid>,
    lambda_start: Option<f64>,
    controls: &ContinuationControls,
) -> Result<BranchResult> {
    let solver = NavierSolver::new(*params, grid.clone())?;
    let (start, bound) = match lambda_start {
        Some(l) => (l, None),
        None => {
            let b = lambda_star_upper_bound(params, grid)?;
            (0.1 * b.eigen_bound, Some(b))
        }
    };
    if !(start > 0.0) {
        return Err(config(format!(
            "continuation start must be positive, got {start}"
        )));
    }
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut low: Option<f64> = None;
    let mut high: Option<f64> = None;
    let mut step = start;
    let mut lambda = start;
    for _ in 0..controls.max_trials {
        let warm = points.last().map(|p| p.profile.values.as_slice());
        match minimal_solution_with(&solver, lambda, warm, &controls.iteration) {
            Ok(mut p) => {
                if controls.compute_mu1 {
                    p.mu1 = Some(stability::mu1_of_solution(params, &p)?.mu);
                }
                points.push(p);
                low = Some(lambda);
                step *= controls.growth;
            }
            Err(Error::NonConvergence { .. }) => {
                if low.is_none() {
                    return Err(Error::Inconsistent(format!(
                        "continuation start lambda = {lambda} does not converge"
                    )));
                }
                high = Some(high.map_or(lambda, |h: f64| h.min(lambda)));
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
        let lo = low.expect("set after the first accepted point");
        if let Some(hi) = high {
            if (hi - lo) <= controls.rel_width * hi {
                if !(lo < hi) {
                    return Err(Error::Inconsistent("empty pull-in bracket".into()));
                }
                return Ok(BranchResult {
                    params: *params,
                    points,
                    lambda_star_low: lo,
                    lambda_star_high: hi,
                    upper_bound: bound,
                });
            }
            if lo + step >= hi {
                step = 0.5 * (hi - lo);
            }
        }
        lambda = lo + step;
    }
    Err(Error::Inconsistent(format!(
        "continuation exhausted {} trials without closing the bracket",
        controls.max_trials
    )))
}

/// Minimal solutions at a prescribed list of `λ` values (sorted ascending).
pub fn solve_at(
    params: &ProblemParams,
    grid: Arc<RadialGrid>,
    lambdas: &[f64],
    controls: &ContinuationControls,
) -> Result<Vec<BranchPoint>> {
    let solver = NavierSolver::new(*params, grid)?;
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<BranchPoint> = Vec::with_capacity(sorted.len());
    for l in sorted {
        let warm = out.last().map(|p| p.profile.values.as_slice());
        let mut p = minimal_solution_with(&solver, l, warm, &controls.iteration)?;
        if controls.compute_mu1 {
            p.mu1 = Some(stability::mu1_of_solution(params, &p)?.mu);
        }
        out.push(p);
    }
    Ok(out)
}

/// Default grid for branch computations.
pub fn default_branch_grid(nodes: usize, r_min: f64) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::geometric(nodes, r_min)?))
}
