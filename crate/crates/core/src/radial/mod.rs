//! Exact radial calculus on power sums and its finite-volume counterpart.

pub mod grid;
pub mod laplacian;
pub mod powersum;
pub mod quadrature;

pub use grid::{make_grid, Grading, GridDescriptor, GridFunction, RadialGrid, MIN_NODES};
pub use laplacian::RadialLaplacian;
pub use powersum::{int, q, series_at_zero, CompiledPowerSum, PowerSum, Rational, Series, Term};
pub use quadrature::{compensated_sum, integrate_radial};

/// `Δ` of a power sum in dimension `n`.
pub fn power_laplacian(p: &PowerSum, n: u32) -> PowerSum {
    p.laplacian(n)
}

/// `Δ²` of a power sum in dimension `n`.
pub fn power_bilaplacian(p: &PowerSum, n: u32) -> PowerSum {
    p.bilaplacian(n)
}

/// Builds the finite-volume `Δ` on a grid.
pub fn discrete_laplacian(
    grid: std::sync::Arc<RadialGrid>,
    n: u32,
) -> crate::error::Result<RadialLaplacian> {
    RadialLaplacian::new(grid, n)
}
