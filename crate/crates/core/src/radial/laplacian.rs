//! Finite-volume radial Laplacian.
//!
//! Node `i` owns the cell `[f_i, f_{i+1}]` with `f_0 = 0`, interior faces at the
//! node midpoints and `f_M = 1`. The origin face has zero area, which encodes
//! `u'(0) = 0`. Volumes and face fluxes are carried as logarithms so that
//! `r^{N}` underflow near the origin does not poison the coefficients.

use std::sync::Arc;

use crate::error::{config, Result};
use crate::linalg::SymBand;

use super::grid::RadialGrid;

#[derive(Clone, Debug)]
pub struct RadialLaplacian {
    grid: Arc<RadialGrid>,
    dimension: u32,
    ln_volume: Vec<f64>,
    /// `ln(f^{N−1} / (r_{j+1} − r_j))` for the face between nodes `j` and `j+1`.
    ln_flux: Vec<f64>,
    faces: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl RadialLaplacian {
    pub fn new(grid: Arc<RadialGrid>, dimension: u32) -> Result<Self> {
        if dimension < 1 {
            return Err(config("dimension must be positive"));
        }
        let r = grid.nodes();
        let m = r.len();
        let nf = f64::from(dimension);
        let mut faces = Vec::with_capacity(m + 1);
        faces.push(0.0);
        faces.extend(r.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        faces.push(1.0);

        let ln_n = nf.ln();
        let ln_volume: Vec<f64> = (0..m)
            .map(|i| {
                let (a, b) = (faces[i], faces[i + 1]);
                if a == 0.0 {
                    nf * b.ln() - ln_n
                } else {
                    let x = nf * (a / b).ln();
                    nf * b.ln() + (-x.exp_m1()).ln() - ln_n
                }
            })
            .collect();
        let ln_flux: Vec<f64> = (0..m - 1)
            .map(|j| (nf - 1.0) * faces[j + 1].ln() - (r[j + 1] - r[j]).ln())
            .collect();
        if ln_volume.iter().chain(&ln_flux).any(|v| !v.is_finite()) {
            return Err(config("grid too fine to resolve cell volumes"));
        }
        let mut left = vec![0.0; m];
        let mut right = vec![0.0; m];
        for i in 0..m {
            if i > 0 {
                left[i] = (ln_flux[i - 1] - ln_volume[i]).exp();
            }
            if i + 1 < m {
                right[i] = (ln_flux[i] - ln_volume[i]).exp();
            }
        }
        Ok(Self {
            grid,
            dimension,
            ln_volume,
            ln_flux,
            faces,
            left,
            right,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn ln_volumes(&self) -> &[f64] {
        &self.ln_volume
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.ln_volume[i].exp()
    }

    /// Interior midpoint faces; entry `j` separates nodes `j` and `j+1`.
    pub fn interior_faces(&self) -> &[f64] {
        &self.faces[1..self.faces.len() - 1]
    }

    pub fn flux_coefficient(&self, j: usize) -> f64 {
        self.ln_flux[j].exp()
    }

    /// Row-scaled coefficients `F_{i−1/2}/V_i` and `F_{i+1/2}/V_i`.
    pub fn row_coefficients(&self) -> (&[f64], &[f64]) {
        (&self.left, &self.right)
    }

    /// `Δu` at the interior nodes for samples `u` on all nodes.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let m = self.len();
        if u.len() != m {
            return Err(config(format!("{} samples for {} nodes", u.len(), m)));
        }
        Ok((0..m - 1)
            .map(|i| {
                let l = if i > 0 {
                    self.left[i] * (u[i] - u[i - 1])
                } else {
                    0.0
                };
                self.right[i] * (u[i + 1] - u[i]) - l
            })
            .collect())
    }

    /// Magnitude bound `|Δ||u|` for the stencil, used to scale residuals.
    pub fn apply_abs(&self, u: &[f64]) -> Result<Vec<f64>> {
        let m = self.len();
        if u.len() != m {
            return Err(config(format!("{} samples for {} nodes", u.len(), m)));
        }
        Ok((0..m - 1)
            .map(|i| {
                let l = if i > 0 {
                    self.left[i].abs() * (u[i].abs() + u[i - 1].abs())
                } else {
                    0.0
                };
                self.right[i].abs() * (u[i + 1].abs() + u[i].abs()) + l
            })
            .collect())
    }

    /// Symmetric form `V^{-1/2} K V^{-1/2}` of `−Δ`.
    ///
    /// With `free_boundary` the node at `r = 1` is an unknown with a
    /// natural boundary condition; otherwise it is eliminated (Dirichlet).
    /// `face_weight`, if given, multiplies every interior face flux.
    pub fn symmetric(&self, free_boundary: bool, face_weight: Option<&[f64]>) -> SymBand {
        let m = self.len();
        let n = if free_boundary { m } else { m - 1 };
        let mut a = SymBand::zeros(n, 1);
        for j in 0..m - 1 {
            let w = face_weight.map_or(1.0, |fw| fw[j]);
            let sl = (self.ln_flux[j] - self.ln_volume[j]).exp() * w;
            a.add(j, j, sl);
            if j + 1 < n {
                let sr = (self.ln_flux[j] - self.ln_volume[j + 1]).exp() * w;
                a.add(j + 1, j + 1, sr);
                let off = -(self.ln_flux[j] - 0.5 * (self.ln_volume[j] + self.ln_volume[j + 1]))
                    .exp()
                    * w;
                a.add(j + 1, j, off);
            }
        }
        a
    }

    /// Maps nodal values to the symmetric coordinates `y = V^{1/2} u`.
    pub fn to_symmetric(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.ln_volume)
            .map(|(x, lv)| x * (0.5 * lv).exp())
            .collect()
    }

    pub fn from_symmetric(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.ln_volume)
            .map(|(x, lv)| x * (-0.5 * lv).exp())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::{make_grid, Grading};

    #[test]
    fn exact_on_quadratics() {
        for n in [2u32, 5, 9, 16] {
            let g = Arc::new(make_grid(200, 1e-3, Grading::Geometric).unwrap());
            let lap = RadialLaplacian::new(g.clone(), n).unwrap();
            let u: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
            for v in lap.apply(&u).unwrap() {
                assert!((v - 2.0 * f64::from(n)).abs() < 1e-9 * f64::from(n), "{v}");
            }
        }
    }

    #[test]
    fn survives_volume_underflow() {
        let g = Arc::new(make_grid(500, 1e-8, Grading::Geometric).unwrap());
        let lap = RadialLaplacian::new(g, 40).unwrap();
        assert!(lap.ln_volumes()[0] < -700.0);
        let a = lap.symmetric(false, None);
        assert!(a.diag().iter().all(|d| d.is_finite() && *d > 0.0));
    }
}
