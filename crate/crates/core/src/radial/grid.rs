use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Smallest node count accepted by [`make_grid`].
pub const MIN_NODES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    /// `r_i = r_min (1 / r_min)^{i/(M−1)}`, `i = 0..M−1`.
    Geometric,
    /// `r_i = (i / M)^q`, `i = 1..M`.
    Power { q: f64 },
}

/// Strictly increasing nodes ending at `r = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: Grading,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub nodes: usize,
    pub r_min: f64,
    pub grading: Grading,
}

pub fn make_grid(m: usize, r_min: f64, grading: Grading) -> Result<RadialGrid> {
    if m < MIN_NODES {
        return Err(config(format!(
            "grid needs at least {MIN_NODES} nodes, got {m}"
        )));
    }
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(config(format!("r_min must lie in (0, 1), got {r_min}")));
    }
    let nodes: Vec<f64> = match grading {
        Grading::Geometric => {
            let l = r_min.ln();
            let last = (m - 1) as f64;
            (0..m)
                .map(|i| match i {
                    0 => r_min,
                    _ if i == m - 1 => 1.0,
                    _ => (l * (1.0 - i as f64 / last)).exp(),
                })
                .collect()
        }
        Grading::Power { q } => {
            if !(q.is_finite() && q > 0.0) {
                return Err(config(format!(
                    "power grading exponent must be positive, got {q}"
                )));
            }
            let first = (1.0 / m as f64).powf(q);
            if first < r_min {
                return Err(config(format!(
                    "first node {first:e} of the power grid lies below r_min = {r_min:e}"
                )));
            }
            (1..=m)
                .map(|i| {
                    if i == m {
                        1.0
                    } else {
                        (i as f64 / m as f64).powf(q)
                    }
                })
                .collect()
        }
    };
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config("grid nodes are not strictly increasing"));
    }
    Ok(RadialGrid { nodes, grading })
}

impl RadialGrid {
    pub fn geometric(m: usize, r_min: f64) -> Result<Self> {
        make_grid(m, r_min, Grading::Geometric)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Nodes strictly inside `(0, 1)`.
    pub fn interior(&self) -> &[f64] {
        &self.nodes[..self.nodes.len() - 1]
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            nodes: self.len(),
            r_min: self.r_min(),
            grading: self.grading,
        }
    }

    pub fn sample<F: FnMut(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().copied().map(f).collect()
    }
}

/// Samples of a radial function on every node of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(config(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Self {
        let values = grid.sample(f);
        Self { grid, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn boundary_value(&self) -> f64 {
        *self.values.last().expect("grid functions are never empty")
    }
}
