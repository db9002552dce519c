//! Numerical laboratory for the radial MEMS equation
//! `βΔ²u − τΔu = λ/(1−u)²` on the unit ball with Navier boundary data.
//!
//! * [`radial`] exact power sums, graded grids, the finite-volume Laplacian.
//! * [`branch`] the monotone iteration, branch continuation and λ* bounds.
//! * [`stability`] the linearized eigenvalue and weighted Rayleigh quotients.
//! * [`hardy_rellich`] Hardy-Rellich weights, Bessel pairs, verification.
//! * [`subsolutions`] singular sub-solutions and their certificates.
//! * [`report`] versioned JSON reports used by the command line tool.

// `!(x > 0.0)` style tests are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod cli;
pub mod error;
pub mod hardy_rellich;
pub mod linalg;
pub mod radial;
pub mod report;
pub mod stability;
pub mod subsolutions;

pub use error::{Error, NonConvergenceReason, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/power_sums.md")]
    mod power_sums {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/branch.md")]
    mod branch {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/hardy_rellich.md")]
    mod hardy_rellich {}
    #[doc = include_str!("../../../book/src/subsolutions.md")]
    mod subsolutions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
