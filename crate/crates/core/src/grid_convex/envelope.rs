use serde::{Deserialize, Serialize};

use super::dual::legendre;
use super::grid::SlopeInterval;
use super::potential::{align, Potential};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Rooftop envelope: the largest convex potential below `min(u, v)`.
///
/// Computed as the conjugate of `max(u*, v*)`; breakpoints land on grid
/// nodes. Disjoint dual domains give [`Error::EmptyRooftop`].
pub fn rooftop(u: &Potential, v: &Potential) -> Result<Potential> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    legendre(u)
        .max(&legendre(v))
        .ok_or(Error::EmptyRooftop)?
        .conjugate_on(u.grid())
}

/// Rooftop of several potentials on one grid.
pub fn rooftop_all<'a>(mut it: impl Iterator<Item = &'a Potential>) -> Result<Potential> {
    let first = it.next().ok_or(Error::EmptyFamily)?.clone();
    it.try_fold(first, |acc, u| rooftop(&acc, u))
}

/// Envelope with singularity type `q`: the conjugate of `u*` restricted to
/// `q`. Equals the stabilized limit of `rooftop(psi + C, u)` as `C` grows.
pub fn project_to_interval(q: &SlopeInterval, u: &Potential) -> Result<Potential> {
    legendre(u)
        .restrict(q)
        .ok_or(Error::EmptyRooftop)?
        .conjugate_on(u.grid())
}

/// Projection `P[psi](u)` onto the singularity type of a model envelope.
pub fn model_project(psi: &ModelEnvelope, u: &Potential) -> Result<Potential> {
    project_to_interval(psi.interval(), u)
}

/// Model type envelope, keyed by its dual slope interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelEnvelope {
    q: SlopeInterval,
    potential: Potential,
}

impl ModelEnvelope {
    /// Builds the envelope `P[psi](reference)` for slope interval `q`.
    pub fn from_interval(reference: &Potential, q: SlopeInterval) -> Result<Self> {
        let polytope = reference.grid().polytope();
        if reference.dual_domain() != *polytope {
            return Err(Error::Validation(
                "reference potential must have full dual domain".into(),
            ));
        }
        if !polytope.contains_interval(&q) {
            return Err(Error::IntervalOutOfPolytope(
                format_rational(&q.lo),
                format_rational(&q.hi),
            ));
        }
        let potential = project_to_interval(&q, reference)?;
        Ok(ModelEnvelope { q, potential })
    }

    pub fn interval(&self) -> &SlopeInterval {
        &self.q
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Total mass `V_psi`, the length of the slope interval.
    pub fn mass(&self) -> Rational {
        self.q.length()
    }

    pub fn has_positive_mass(&self) -> bool {
        !self.q.is_degenerate()
    }
}

/// Whether `psi` is a fixed point of projecting the reference onto its own
/// singularity type.
pub fn is_model_type(reference: &Potential, psi: &Potential) -> Result<bool> {
    Ok(project_to_interval(&psi.dual_domain(), reference)? == *psi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Singularity {
    MoreSingular,
    LessSingular,
    Equivalent,
    Incomparable,
}

/// Singularity comparison by dual-domain inclusion: `u` is more singular
/// than `v` iff `u - v` is bounded above, iff `dual(u) ⊆ dual(v)`.
pub fn compare_singularity(u: &Potential, v: &Potential) -> Singularity {
    let (du, dv) = (u.dual_domain(), v.dual_domain());
    match (dv.contains_interval(&du), du.contains_interval(&dv)) {
        (true, true) => Singularity::Equivalent,
        (true, false) => Singularity::MoreSingular,
        (false, true) => Singularity::LessSingular,
        (false, false) => Singularity::Incomparable,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupDiff {
    Finite(Rational),
    PlusInfinity,
}

impl SupDiff {
    pub fn finite(self) -> Option<Rational> {
        match self {
            SupDiff::Finite(r) => Some(r),
            SupDiff::PlusInfinity => None,
        }
    }
}

/// Exact `sup_x (u(x) - v(x))` over the real line.
///
/// The difference is piecewise linear with kinks at nodes; on the rays it
/// moves with slope `slope(u) - slope(v)`, so the sup is `+inf` exactly when
/// a ray diverges upward and otherwise the largest node difference.
pub fn sup_diff(u: &Potential, v: &Potential) -> Result<SupDiff> {
    if u.slope_left() < v.slope_left() || u.slope_right() > v.slope_right() {
        return Ok(SupDiff::PlusInfinity);
    }
    let (u, v) = align(u, v)?;
    let best = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a - b)
        .max()
        .expect("grids have nodes");
    Ok(SupDiff::Finite(best))
}

/// `u <= v` everywhere on the real line.
pub fn le_everywhere(u: &Potential, v: &Potential) -> Result<bool> {
    Ok(match sup_diff(u, v)? {
        SupDiff::Finite(s) => s <= Rational::from_integer(0.into()),
        SupDiff::PlusInfinity => false,
    })
}
