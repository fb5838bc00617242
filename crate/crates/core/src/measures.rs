//! Atomic Monge-Ampere measures and the measure inequalities.
//!
//! In the piecewise-linear model the Monge-Ampere measure of a potential is
//! the sum of its slope jumps placed at the grid nodes. Integrals against such
//! measures only read node values, so everything here is exact except
//! [`entropy`], which needs a logarithm.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_convex::{
    align, compare_singularity, model_project, rooftop, Grid, ModelEnvelope, Potential,
    Singularity,
};
use crate::rational::{format_rational, serde_rat, to_f64, Rational};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    grid: Arc<Grid>,
    #[serde(with = "serde_rat::vec")]
    masses: Vec<Rational>,
}

impl AtomicMeasure {
    pub fn new(grid: Arc<Grid>, masses: Vec<Rational>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: masses.len() });
        }
        if let Some(i) = masses.iter().position(|m| m < &Rational::zero()) {
            return Err(Error::Validation(format!("negative mass at node {i}")));
        }
        Ok(AtomicMeasure { grid, masses })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn total(&self) -> Rational {
        self.masses.iter().sum()
    }

    /// Divides by the total mass; `None` for the zero measure.
    pub fn normalized(&self) -> Option<AtomicMeasure> {
        let t = self.total();
        if t.is_zero() {
            return None;
        }
        Some(AtomicMeasure {
            grid: self.grid.clone(),
            masses: self.masses.iter().map(|m| m / &t).collect(),
        })
    }

    /// Same measure on a finer grid (new nodes carry no mass).
    pub fn refine(&self, grid: &Arc<Grid>) -> Result<AtomicMeasure> {
        if **grid == *self.grid {
            return Ok(self.clone());
        }
        if !grid.contains_all(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let mut masses = vec![Rational::zero(); grid.len()];
        for (x, m) in self.grid.nodes().iter().zip(&self.masses) {
            masses[grid.index_of(x).expect("checked above")] = m.clone();
        }
        Ok(AtomicMeasure { grid: grid.clone(), masses })
    }

    /// Mass of the node set selected by `keep`.
    pub fn mass_where(&self, keep: impl Fn(usize) -> bool) -> Rational {
        self.masses.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, m)| m).sum()
    }
}

/// `MA(u)`: slope jumps of `u` at the nodes.
pub fn ma(u: &Potential) -> AtomicMeasure {
    AtomicMeasure { grid: u.grid().clone(), masses: u.jumps() }
}

/// Mixed measure `MA(u^j, v^(1-j))`; in one complex dimension it is `MA(u)`
/// for `j = 1` and `MA(v)` for `j = 0`.
pub fn mixed_ma(u: &Potential, v: &Potential, j: i64) -> Result<AtomicMeasure> {
    match j {
        1 => Ok(ma(u)),
        0 => Ok(ma(v)),
        _ => Err(Error::BadExponent(j)),
    }
}

/// `V_u`: the total mass, equal to the length of the dual domain.
pub fn total_mass(u: &Potential) -> Rational {
    u.mass()
}

/// `sum_i g(x_i) mu_i` for node values `g` on the measure's grid.
pub fn integrate(g: &[Rational], mu: &AtomicMeasure) -> Result<Rational> {
    if g.len() != mu.masses.len() {
        return Err(Error::LengthMismatch { expected: mu.masses.len(), got: g.len() });
    }
    Ok(g.iter().zip(&mu.masses).map(|(a, m)| a * m).sum())
}

/// `∫ (u - v) dmu`, refining whatever needs refining onto a common grid.
pub fn integrate_diff(u: &Potential, v: &Potential, mu: &AtomicMeasure) -> Result<Rational> {
    let (u, v) = align(u, v)?;
    let grid = if **u.grid() == *mu.grid {
        u.grid().clone()
    } else {
        Arc::new(u.grid().union(&mu.grid)?)
    };
    let (u, v, mu) = (u.refine(&grid)?, v.refine(&grid)?, mu.refine(&grid)?);
    let g: Vec<Rational> = u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect();
    integrate(&g, &mu)
}

/// Relative entropy with the exact summands kept alongside the float.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entropy {
    /// `sum nu_i ln(nu_i / mu_i)`; `f64::INFINITY` when `nu` is not
    /// absolutely continuous with respect to `mu`.
    pub value: f64,
    /// `(nu_i, mu_i)` for every node with `nu_i > 0`.
    #[serde(skip)]
    pub terms: Vec<(Rational, Rational)>,
}

/// Relative entropy `H_mu(nu)` of two probability measures on one grid.
///
/// Both inputs must already have total mass one; this does not normalize.
pub fn entropy(nu: &AtomicMeasure, mu: &AtomicMeasure) -> Result<Entropy> {
    for m in [nu, mu] {
        let t = m.total();
        if !t.is_one() {
            return Err(Error::NotNormalized(format_rational(&t)));
        }
    }
    if nu.grid != mu.grid {
        return Err(Error::GridMismatch);
    }
    let terms: Vec<(Rational, Rational)> = nu
        .masses
        .iter()
        .zip(&mu.masses)
        .filter(|(n, _)| !n.is_zero())
        .map(|(n, m)| (n.clone(), m.clone()))
        .collect();
    let value = if terms.iter().any(|(_, m)| m.is_zero()) {
        f64::INFINITY
    } else {
        terms
            .iter()
            .map(|(n, m)| to_f64(n) * to_f64(&(n / m)).ln())
            .sum::<f64>()
            // rounding can leave a tiny negative value for equal measures
            .max(0.0)
    };
    Ok(Entropy { value, terms })
}

/// Comparison principle for `u ≼ v`: `MA(u)({v < u}) <= MA(v)({v < u})`.
///
/// The set `{v < u}` is open and both measures are atomic at the nodes, so
/// only the nodes where `v < u` strictly matter.
pub fn check_comparison_principle(u: &Potential, v: &Potential) -> Result<Report> {
    if !matches!(compare_singularity(u, v), Singularity::MoreSingular | Singularity::Equivalent) {
        return Err(Error::PreconditionViolated("u must be more singular than v".into()));
    }
    let (u, v) = align(u, v)?;
    let strict: Vec<bool> = u.values().iter().zip(v.values()).map(|(a, b)| b < a).collect();
    let lhs = ma(&u).mass_where(|i| strict[i]);
    let rhs = ma(&v).mass_where(|i| strict[i]);
    let mut report = Report::le(lhs, rhs);
    if !report.pass {
        report.witnesses = strict
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| format!("node {i}"))
            .collect();
    }
    Ok(report)
}

fn contact(p: &Potential, u: &Potential) -> Vec<bool> {
    p.values().iter().zip(u.values()).map(|(a, b)| a == b).collect()
}

/// `MA(P(u,v)) <= 1_{P=u} MA(u) + 1_{P=v} MA(v)`, checked node by node.
pub fn check_rooftop_mass_bound(u: &Potential, v: &Potential) -> Result<Report> {
    let (u, v) = align(u, v)?;
    let p = rooftop(&u, &v)?;
    let (on_u, on_v) = (contact(&p, &u), contact(&p, &v));
    let (mu, mv) = (ma(&u), ma(&v));
    let rhs = (0..p.values().len())
        .map(|i| {
            let mut b = Rational::zero();
            if on_u[i] {
                b += &mu.masses[i];
            }
            if on_v[i] {
                b += &mv.masses[i];
            }
            b
        })
        .collect();
    Ok(Report::le_nodewise(ma(&p).masses, rhs))
}

/// `MA(P[psi](u)) <= 1_{P[psi](u)=u} MA(u)`, checked node by node.
pub fn check_model_mass_bound(psi: &ModelEnvelope, u: &Potential) -> Result<Report> {
    let p = model_project(psi, u)?;
    let on_u = contact(&p, u);
    let mu = ma(u);
    let rhs = (0..p.values().len())
        .map(|i| if on_u[i] { mu.masses[i].clone() } else { Rational::zero() })
        .collect();
    Ok(Report::le_nodewise(ma(&p).masses, rhs))
}
