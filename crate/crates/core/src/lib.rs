//! Delaunay-type periodic solutions of the constant Q-curvature equation on
//! the cylinder ℝ × S^{n−1}, and the conformal Q-energy they realize.
//!
//! The radial equation `v'''' − c2·v'' + c0·v = r·v^{(n+4)/(n−4)}` has the
//! constant cylindrical solution, the spherical solution `cosh(t)^{−(n−4)/2}`
//! and a one-parameter family of periodic solutions indexed by their maximum
//! `a ∈ (v_cyl, 1)`. This crate computes that family by symmetric shooting,
//! evaluates the normalized total Q-curvature on it and checks that the
//! value approaches the round-sphere value as `a → 1`.

// `!(x > 0.0)` is used on purpose so that NaN inputs fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod export;
pub mod functionals;
pub mod gamma;
pub mod integrator;
pub mod params;
pub mod portrait;
pub mod quadrature;
pub mod rk;
pub mod selfcheck;
pub mod solver;
pub mod spectral;
pub mod stability;
pub mod study;
pub mod taylor;

pub use dynamics::{CylinderState, Profile};
pub use error::{Error, Result};
pub use integrator::{integrate, EventSpec, Trajectory};
pub use params::{make_params, DimensionParams};
pub use solver::{shoot, DelaunayOrbit, SweepReport};

/// Crate version, stamped into every output file header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
