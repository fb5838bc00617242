//! Exact discrete model of relative finite-energy spaces.
//!
//! Potentials are piecewise-linear convex functions on a rational grid with
//! end slopes inside a closed slope interval (the polytope). Everything that
//! can be exact is exact: envelopes, Monge-Ampere measures, energies and the
//! distances built on top of them are computed in arbitrary-precision
//! rationals. The only floating-point surface is relative entropy.
//!
//! Module map:
//!
//! - [`grid_convex`]: grids, potentials, Legendre duals, rooftop and model
//!   envelopes, singularity comparison.
//! - [`measures`]: atomic Monge-Ampere measures, integration, entropy and the
//!   measure inequalities as checkable reports.
//! - [`energy`]: the relative energy functional and its identities.
//! - [`metric`]: the distance `d`, the rho-chain bound, Darboux sums and
//!   sup-bound estimation.
//! - [`families`]: model families, entropy-capped sampled families and
//!   projections between levels.
//! - [`bigspace`]: the cross-level quasi-distance and its chain metrization.
//! - [`ghlimits`]: finite metric spaces, correspondences and the cp-GH /
//!   direct-limit experiments.
//! - [`scenario`] and [`suites`]: JSON scenario execution and seeded property
//!   suites used by the `fem-lab` binary.

#![forbid(unsafe_code)]

pub mod bigspace;
pub mod energy;
pub mod error;
pub mod families;
pub mod ghlimits;
pub mod grid_convex;
pub mod measures;
pub mod metric;
pub mod rational;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod suites;

pub use error::{Error, Result};
pub use grid_convex::{
    compare_singularity, legendre, model_project, rooftop, sup_diff, ConvexDual, Grid,
    ModelEnvelope, Potential, Singularity, SlopeInterval, SupDiff,
};
pub use measures::AtomicMeasure;
pub use rational::Rational;
