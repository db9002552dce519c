use crate::error::{config, Result};

use super::grid::RadialGrid;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in xs {
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

/// Trapezoid approximation of `∫_{r_min}^{1} f(r) r^{N−1} dr` from nodal samples.
/// The surface measure of the sphere is not included.
pub fn integrate_radial(values: &[f64], grid: &RadialGrid, n: u32) -> Result<f64> {
    let r = grid.nodes();
    if values.len() != r.len() {
        return Err(config(format!(
            "{} samples for a grid of {} nodes",
            values.len(),
            r.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(crate::error::Error::Domain(format!(
            "non-finite sample {} at r = {:e}",
            values[i], r[i]
        )));
    }
    let p = f64::from(n) - 1.0;
    let g: Vec<f64> = values.iter().zip(r).map(|(f, ri)| f * ri.powf(p)).collect();
    Ok(compensated_sum(
        (0..r.len() - 1).map(|i| 0.5 * (g[i] + g[i + 1]) * (r[i + 1] - r[i])),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::{make_grid, Grading};

    #[test]
    fn singular_integrand() {
        let n = 9;
        let r_min = 1e-6;
        let g = make_grid(10_000, r_min, Grading::Geometric).unwrap();
        let f = g.sample(|r| r.powf(-8.0 / 3.0));
        let got = integrate_radial(&f, &g, n).unwrap();
        let exact = (1.0 - r_min.powf(19.0 / 3.0)) * 3.0 / 19.0;
        assert!(((got - exact) / exact).abs() < 5e-3);
    }

    #[test]
    fn compensated_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
