//! Linearized stability and weighted Rayleigh quotients on radial grids.
//!
//! Every operator is assembled in the symmetric coordinates `y = V^{1/2} h`,
//! where `V` are the cell volumes, so the discrete `L²(r^{N−1} dr)` norm is the
//! Euclidean norm of `y`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::branch::{BranchPoint, ProblemParams};
use crate::error::{config, Error, Result};
use crate::hardy_rellich::RadialWeight;
use crate::linalg::{smallest_eigenpair, EigenOptions, SquareOperator, SymBand};
use crate::radial::{GridFunction, RadialGrid, RadialLaplacian};

/// Zeroth-order term `P` in `βΔ² − τΔ − P`.
#[derive(Clone, Copy, Debug)]
pub enum Potential<'a> {
    Zero,
    Constant(f64),
    /// Values at the interior nodes.
    Samples(&'a [f64]),
    Weight(&'a RadialWeight),
}

impl Potential<'_> {
    fn samples(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        let interior = grid.interior();
        match self {
            Self::Zero => Ok(vec![0.0; interior.len()]),
            Self::Constant(c) => Ok(vec![*c; interior.len()]),
            Self::Samples(s) => {
                if s.len() != interior.len() {
                    return Err(config(format!(
                        "{} potential samples for {} interior nodes",
                        s.len(),
                        interior.len()
                    )));
                }
                Ok(s.to_vec())
            }
            Self::Weight(w) => {
                let ev = w.evaluator();
                Ok(interior.iter().map(|&r| ev.eval(r)).collect())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub mu: f64,
    /// Normalized in `L²(r^{N−1} dr)`, positive, zero at `r = 1`.
    pub eigenfunction: GridFunction,
    pub residual: f64,
    pub explicit_residual: f64,
    pub iterations: usize,
    /// Spherical-harmonic sector; radial problems are `k = 0`.
    pub mode_index: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EigenSummary {
    pub mu: f64,
    pub residual: f64,
    pub explicit_residual: f64,
    pub iterations: usize,
    pub mode_index: u32,
}

impl EigenResult {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary {
            mu: self.mu,
            residual: self.residual,
            explicit_residual: self.explicit_residual,
            iterations: self.iterations,
            mode_index: self.mode_index,
        }
    }
}

fn start_vector(lap: &RadialLaplacian, n: usize) -> Vec<f64> {
    let f: Vec<f64> = lap.grid().nodes()[..n]
        .iter()
        .map(|r| 1.0 - r * r)
        .collect();
    lap.to_symmetric(&f)
}

/// Lowest eigenpair of `βΔ² − τΔ − P` with `h = Δh = 0` at `r = 1`.
pub fn navier_eigen_smallest(
    params: &ProblemParams,
    grid: Arc<RadialGrid>,
    potential: Potential<'_>,
) -> Result<EigenResult> {
    params.validate()?;
    let lap = RadialLaplacian::new(grid.clone(), params.dimension)?;
    let p = potential.samples(&grid)?;
    let t = lap.symmetric(false, None);
    let start = start_vector(&lap, t.dim());
    let op = SquareOperator::new(t, None, params.beta, params.tau, Some(p))?;
    let pair = smallest_eigenpair(&op, &start, &EigenOptions::default())?;
    let mut values = lap.from_symmetric(&pair.vector);
    values.push(0.0);
    Ok(EigenResult {
        mu: pair.value,
        eigenfunction: GridFunction::new(grid, values)?,
        residual: pair.residual,
        explicit_residual: pair.explicit_residual,
        iterations: pair.iterations,
        mode_index: 0,
    })
}

/// Lowest eigenpair of `−Δ` with `h(1) = 0`.
pub fn dirichlet_laplacian_smallest(n: u32, grid: Arc<RadialGrid>) -> Result<EigenResult> {
    let lap = RadialLaplacian::new(grid.clone(), n)?;
    let t = lap.symmetric(false, None);
    let start = start_vector(&lap, t.dim());
    let pair = smallest_eigenpair(&t, &start, &EigenOptions::default())?;
    let mut values = lap.from_symmetric(&pair.vector);
    values.push(0.0);
    Ok(EigenResult {
        mu: pair.value,
        eigenfunction: GridFunction::new(grid, values)?,
        residual: pair.residual,
        explicit_residual: pair.explicit_residual,
        iterations: pair.iterations,
        mode_index: 0,
    })
}

/// `μ₁` of the linearization `βΔ² − τΔ − 2λ/(1−u)³` at a branch point.
pub fn mu1_of_solution(params: &ProblemParams, point: &BranchPoint) -> Result<EigenResult> {
    let u = &point.profile.values;
    let interior = &u[..u.len() - 1];
    if interior.iter().any(|v| !(*v < 1.0)) {
        return Err(Error::Domain("profile touches 1".into()));
    }
    let p: Vec<f64> = interior
        .iter()
        .map(|v| 2.0 * point.lambda / (1.0 - v).powi(3))
        .collect();
    navier_eigen_smallest(params, point.profile.grid.clone(), Potential::Samples(&p))
}

/// Spectral stability of a branch point: `μ₁ > 0`.
pub fn is_stable(params: &ProblemParams, point: &BranchPoint) -> Result<(bool, EigenResult)> {
    let e = mu1_of_solution(params, point)?;
    Ok((e.mu > 0.0, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Numerator {
    /// `∫(Δ_k f)² r^{N−1}`.
    Laplacian,
    /// `∫(Δ_k f)² + τ(|f'|² + c_k f²/r²) r^{N−1}`.
    LaplacianWithGradient { tau: f64 },
}

#[derive(Clone, Debug)]
pub struct RayleighResult {
    pub quotient: f64,
    /// Nodal values of the minimizer (zero at `r = 1` for Dirichlet problems).
    pub minimizer: Vec<f64>,
    pub residual: f64,
}

fn weight_scaling(weight: &RadialWeight, nodes: &[f64]) -> Result<Vec<f64>> {
    let ev = weight.evaluator();
    nodes
        .iter()
        .map(|&r| {
            let w = ev.eval(r);
            if w > 0.0 && w.is_finite() {
                Ok(1.0 / w.sqrt())
            } else {
                Err(Error::InvalidWeight(format!(
                    "weight {} is {w:e} at node r = {r:e}",
                    weight.name
                )))
            }
        })
        .collect()
}

/// Mode number contribution `c_k = k(N + k − 2)`.
pub fn mode_constant(n: u32, k: u32) -> f64 {
    f64::from(k) * (f64::from(n) + f64::from(k) - 2.0)
}

/// Infimum over the `k`-th spherical mode of the numerator divided by
/// `∫ W f² r^{N−1}`, with Navier conditions at `r = 1`.
pub fn rayleigh_min_mode(
    n: u32,
    k: u32,
    weight: &RadialWeight,
    grid: Arc<RadialGrid>,
    numerator: Numerator,
) -> Result<RayleighResult> {
    let lap = RadialLaplacian::new(grid.clone(), n)?;
    let mut t = lap.symmetric(false, None);
    let interior = grid.interior();
    let ck = mode_constant(n, k);
    if ck != 0.0 {
        t.add_diag(&interior.iter().map(|r| ck / (r * r)).collect::<Vec<_>>());
    }
    let d = weight_scaling(weight, interior)?;
    let tau = match numerator {
        Numerator::Laplacian => 0.0,
        Numerator::LaplacianWithGradient { tau } => tau,
    };
    let op = SquareOperator::new(t, Some(d.clone()), 1.0, tau, None)?;
    let f0: Vec<f64> = interior.iter().map(|r| 1.0 - r * r).collect();
    let start: Vec<f64> = lap
        .to_symmetric(&f0)
        .iter()
        .zip(&d)
        .map(|(y, di)| y / di)
        .collect();
    let pair = smallest_eigenpair(&op, &start, &EigenOptions::default())?;
    let y: Vec<f64> = pair.vector.iter().zip(&d).map(|(z, di)| z * di).collect();
    let mut minimizer = lap.from_symmetric(&y);
    minimizer.push(0.0);
    Ok(RayleighResult {
        quotient: pair.value,
        minimizer,
        residual: pair.residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FirstOrderBoundary {
    /// `f(1) = 0`.
    Dirichlet,
    /// `f(1)` free; `penalty · f(1)²` is added to the numerator.
    Free { penalty: f64 },
}

/// Infimum of `(∫ V f'² r^{N−1} + boundary term) / ∫ W f² r^{N−1}`.
pub fn rayleigh_min_first_order(
    n: u32,
    gradient_weight: Option<&RadialWeight>,
    weight: &RadialWeight,
    grid: Arc<RadialGrid>,
    boundary: FirstOrderBoundary,
) -> Result<RayleighResult> {
    let lap = RadialLaplacian::new(grid.clone(), n)?;
    let face_w: Option<Vec<f64>> = gradient_weight.map(|v| {
        let ev = v.evaluator();
        lap.interior_faces().iter().map(|&r| ev.eval(r)).collect()
    });
    if let Some(fw) = &face_w {
        if fw.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidWeight("gradient weight not positive".into()));
        }
    }
    let free = matches!(boundary, FirstOrderBoundary::Free { .. });
    let mut t: SymBand = lap.symmetric(free, face_w.as_deref());
    let nodes = if free { grid.nodes() } else { grid.interior() };
    if let FirstOrderBoundary::Free { penalty } = boundary {
        let last = nodes.len() - 1;
        t.add(last, last, penalty / lap.volume(last));
    }
    let d = weight_scaling(weight, nodes)?;
    let s = t.congruence(&d);
    let f0: Vec<f64> = nodes.iter().map(|r| 1.0 - 0.5 * r * r).collect();
    let start: Vec<f64> = lap
        .to_symmetric(&f0)
        .iter()
        .zip(&d)
        .map(|(y, di)| y / di)
        .collect();
    let pair = smallest_eigenpair(&s, &start, &EigenOptions::default())?;
    let y: Vec<f64> = pair.vector.iter().zip(&d).map(|(z, di)| z * di).collect();
    let mut minimizer = lap.from_symmetric(&y);
    if !free {
        minimizer.push(0.0);
    }
    Ok(RayleighResult {
        quotient: pair.value,
        minimizer,
        residual: pair.residual,
    })
}
