use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::radial::{GridDescriptor, RadialGrid};
use crate::stability::{
    rayleigh_min_first_order, rayleigh_min_mode, FirstOrderBoundary, Numerator,
};

use super::weight::{first_order_boundary_weight, RadialWeight, Verification};

/// Default allowance below 1 for discrete Rayleigh quotients.
pub const DEFAULT_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeQuotient {
    pub k: u32,
    pub quotient: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    #[serde(rename = "N")]
    pub dimension: u32,
    pub weight: String,
    pub grid: GridDescriptor,
    pub tolerance: f64,
    pub modes: Vec<ModeQuotient>,
    /// `∫x'² / ∫((N−2)²/4) x²/(r² − αr^{N/2+1})` with `x(1) = 0`.
    pub first_order_dirichlet: f64,
    /// Same quotient with `x(1)` free and `(N−1)x(1)²` added above.
    pub first_order_free: f64,
    pub passed: bool,
    /// Minimizer of the first failing mode, on the grid nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_minimizer: Option<Vec<f64>>,
}

impl RayleighReport {
    pub fn min_quotient(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.quotient)
            .fold(f64::INFINITY, f64::min)
    }

    /// Marks `weight` as verified when every check passed.
    pub fn verified_weight(&self, mut weight: RadialWeight) -> RadialWeight {
        if self.passed {
            weight.verification = Some(Verification {
                method: "rayleigh".into(),
                grid_nodes: self.grid.nodes,
                r_min: self.grid.r_min,
                min_quotient: self.min_quotient(),
                tolerance: self.tolerance,
                modes: self.modes.len() as u32,
            });
        }
        weight
    }
}

/// Checks `∫(Δφ)² ≥ ∫Wφ²` mode by mode for `k = 0..=k_max`, together with the
/// first-order inequalities that feed the improved weights.
pub fn verify_weight_rayleigh(
    n: u32,
    weight: &RadialWeight,
    k_max: u32,
    grid: Arc<RadialGrid>,
) -> Result<RayleighReport> {
    verify_weight_rayleigh_with(n, weight, k_max, grid, DEFAULT_TOLERANCE)
}

pub fn verify_weight_rayleigh_with(
    n: u32,
    weight: &RadialWeight,
    k_max: u32,
    grid: Arc<RadialGrid>,
    tolerance: f64,
) -> Result<RayleighReport> {
    let results: Vec<Result<(u32, f64, Vec<f64>)>> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let r = rayleigh_min_mode(n, k, weight, grid.clone(), Numerator::Laplacian)?;
            Ok((k, r.quotient, r.minimizer))
        })
        .collect();
    let mut modes = Vec::with_capacity(results.len());
    let mut failing_minimizer = None;
    for r in results {
        let (k, quotient, minimizer) = r?;
        let passed = quotient >= 1.0 - tolerance;
        if !passed && failing_minimizer.is_none() {
            failing_minimizer = Some(minimizer);
        }
        modes.push(ModeQuotient {
            k,
            quotient,
            passed,
        });
    }
    let fw = first_order_boundary_weight(n)?;
    let dir = rayleigh_min_first_order(n, None, &fw, grid.clone(), FirstOrderBoundary::Dirichlet)?;
    let free = rayleigh_min_first_order(
        n,
        None,
        &fw,
        grid.clone(),
        FirstOrderBoundary::Free {
            penalty: f64::from(n) - 1.0,
        },
    )?;
    let passed = modes.iter().all(|m| m.passed)
        && dir.quotient >= 1.0 - tolerance
        && free.quotient >= 1.0 - tolerance;
    Ok(RayleighReport {
        dimension: n,
        weight: weight.name.clone(),
        grid: grid.descriptor(),
        tolerance,
        modes,
        first_order_dirichlet: dir.quotient,
        first_order_free: free.quotient,
        passed,
        failing_minimizer,
    })
}
