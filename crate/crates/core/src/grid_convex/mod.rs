//! Piecewise-linear convex potentials on a rational grid and the envelope
//! operators, all routed through exact Legendre duals.

mod dual;
mod envelope;
mod grid;
mod potential;

pub use dual::{biconjugate, legendre, ConvexDual};
pub use envelope::{
    compare_singularity, is_model_type, le_everywhere, model_project, project_to_interval,
    rooftop, rooftop_all, sup_diff, ModelEnvelope, Singularity, SupDiff,
};
pub use grid::{Grid, SlopeInterval};
pub use potential::{align, pointwise_max, Potential};
