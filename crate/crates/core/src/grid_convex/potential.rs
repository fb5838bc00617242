use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::grid::{Grid, SlopeInterval};
use crate::error::{Error, Result};
use crate::rational::{format_rational, serde_rat, Rational};

/// Piecewise-linear convex potential over a shared grid.
///
/// Linear between consecutive nodes and affine on the two rays, with slope
/// `slope_left` on `(-inf, x_0]` and `slope_right` on `[x_m, inf)`. The dual
/// domain `[slope_left, slope_right]` carries its singularity type and its
/// slope span is its Monge-Ampere mass.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Potential {
    grid: Arc<Grid>,
    values: Vec<Rational>,
    slope_left: Rational,
    slope_right: Rational,
}

impl Potential {
    /// Validates and builds a potential. Non-convex data is rejected, never
    /// convexified.
    pub fn new(
        grid: Arc<Grid>,
        values: Vec<Rational>,
        slope_left: Rational,
        slope_right: Rational,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        for s in [&slope_left, &slope_right] {
            if !grid.polytope().contains(s) {
                return Err(Error::SlopeOutOfPolytope(format_rational(s)));
            }
        }
        let u = Potential { grid, values, slope_left, slope_right };
        let slopes = u.slope_sequence();
        if let Some(k) = slopes.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::ConvexityViolation {
                left: k,
                right: k + 1,
                left_slope: format_rational(&slopes[k]),
                right_slope: format_rational(&slopes[k + 1]),
            });
        }
        Ok(u)
    }

    /// Affine potential `x -> slope * x + intercept`.
    pub fn affine(grid: Arc<Grid>, slope: Rational, intercept: Rational) -> Result<Self> {
        let values = grid.nodes().iter().map(|x| &slope * x + &intercept).collect();
        Potential::new(grid, values, slope.clone(), slope)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn slope_left(&self) -> &Rational {
        &self.slope_left
    }

    pub fn slope_right(&self) -> &Rational {
        &self.slope_right
    }

    pub fn dual_domain(&self) -> SlopeInterval {
        SlopeInterval { lo: self.slope_left.clone(), hi: self.slope_right.clone() }
    }

    pub fn mass(&self) -> Rational {
        &self.slope_right - &self.slope_left
    }

    /// Chord slopes between consecutive nodes (`m` of them for `m + 1` nodes).
    pub fn chord_slopes(&self) -> Vec<Rational> {
        let x = self.grid.nodes();
        (1..x.len())
            .map(|k| (&self.values[k] - &self.values[k - 1]) / (&x[k] - &x[k - 1]))
            .collect()
    }

    /// `slope_left`, the chord slopes, then `slope_right`.
    pub fn slope_sequence(&self) -> Vec<Rational> {
        let mut s = Vec::with_capacity(self.values.len() + 1);
        s.push(self.slope_left.clone());
        s.extend(self.chord_slopes());
        s.push(self.slope_right.clone());
        s
    }

    /// Slope jump at every node; the atoms of the Monge-Ampere measure.
    pub fn jumps(&self) -> Vec<Rational> {
        self.slope_sequence().windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let nodes = self.grid.nodes();
        let last = nodes.len() - 1;
        if x <= &nodes[0] {
            return &self.values[0] + &self.slope_left * (x - &nodes[0]);
        }
        if x >= &nodes[last] {
            return &self.values[last] + &self.slope_right * (x - &nodes[last]);
        }
        match nodes.binary_search(x) {
            Ok(i) => self.values[i].clone(),
            Err(i) => {
                let (x0, x1) = (&nodes[i - 1], &nodes[i]);
                let t = (x - x0) / (x1 - x0);
                &self.values[i - 1] + t * (&self.values[i] - &self.values[i - 1])
            }
        }
    }

    /// `u + c`.
    pub fn shift(&self, c: &Rational) -> Potential {
        Potential {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
            slope_left: self.slope_left.clone(),
            slope_right: self.slope_right.clone(),
        }
    }

    /// `(1 - t) * self + t * other` on a shared grid, `t` in `[0, 1]`.
    pub fn lerp(&self, other: &Potential, t: &Rational) -> Result<Potential> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if t < &Rational::zero() || t > &Rational::one() {
            return Err(Error::PreconditionViolated("interpolation parameter outside [0, 1]".into()));
        }
        let s = Rational::one() - t;
        let mix = |a: &Rational, b: &Rational| &s * a + t * b;
        Ok(Potential {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| mix(a, b)).collect(),
            slope_left: mix(&self.slope_left, &other.slope_left),
            slope_right: mix(&self.slope_right, &other.slope_right),
        })
    }

    /// Same function expressed on a finer grid. Exact: the finer grid must
    /// contain every current node, so no breakpoint is lost.
    pub fn refine(&self, grid: &Arc<Grid>) -> Result<Potential> {
        if **grid == *self.grid {
            return Ok(self.clone());
        }
        if grid.polytope() != self.grid.polytope() || !grid.contains_all(&self.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Potential {
            grid: grid.clone(),
            values: grid.nodes().iter().map(|x| self.eval(x)).collect(),
            slope_left: self.slope_left.clone(),
            slope_right: self.slope_right.clone(),
        })
    }

    /// Drops nodes where the potential has no kink, keeping the outermost
    /// two. Useful for display; equality comparisons always use full grids.
    pub fn breakpoints(&self) -> Vec<(Rational, Rational)> {
        let jumps = self.jumps();
        let x = self.grid.nodes();
        x.iter()
            .zip(&self.values)
            .zip(&jumps)
            .enumerate()
            .filter(|(i, (_, j))| *i == 0 || *i == x.len() - 1 || !j.is_zero())
            .map(|(_, ((x, v), _))| (x.clone(), v.clone()))
            .collect()
    }
}

/// Expresses both potentials on the union of their grids.
pub fn align(u: &Potential, v: &Potential) -> Result<(Potential, Potential)> {
    if u.grid == v.grid {
        return Ok((u.clone(), v.clone()));
    }
    let g = Arc::new(u.grid.union(&v.grid)?);
    Ok((u.refine(&g)?, v.refine(&g)?))
}

/// Pointwise maximum of two convex potentials.
///
/// The maximum crosses between nodes (and possibly on the rays); each
/// crossing abscissa is rational and is inserted as a new node, so the result
/// lives on a refined grid and is exact.
pub fn pointwise_max(u: &Potential, v: &Potential) -> Result<Potential> {
    let (u, v) = align(u, v)?;
    let x = u.grid.nodes();
    let last = x.len() - 1;
    let diff: Vec<Rational> = u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
    let mut extra = Vec::new();
    for k in 1..x.len() {
        let (d0, d1) = (&diff[k - 1], &diff[k]);
        if (d0.is_zero() || d1.is_zero()) || (d0 > &Rational::zero()) == (d1 > &Rational::zero()) {
            continue;
        }
        // linear interpolation root of the difference inside (x_{k-1}, x_k)
        let t = d0 / (d0 - d1);
        extra.push(&x[k - 1] + t * (&x[k] - &x[k - 1]));
    }
    let ds_left = &u.slope_left - &v.slope_left;
    if !ds_left.is_zero() {
        let c = &x[0] - &diff[0] / &ds_left;
        if c < x[0] {
            extra.push(c);
        }
    }
    let ds_right = &u.slope_right - &v.slope_right;
    if !ds_right.is_zero() {
        let c = &x[last] - &diff[last] / &ds_right;
        if c > x[last] {
            extra.push(c);
        }
    }
    let grid = Arc::new(u.grid.with_extra(extra)?);
    let (u, v) = (u.refine(&grid)?, v.refine(&grid)?);
    let values = u.values.iter().zip(&v.values).map(|(a, b)| a.max(b).clone()).collect();
    Potential::new(
        grid,
        values,
        (&u.slope_left).min(&v.slope_left).clone(),
        (&u.slope_right).max(&v.slope_right).clone(),
    )
}

#[derive(Serialize, Deserialize)]
struct PotentialWire {
    grid: Grid,
    #[serde(with = "serde_rat::vec")]
    values: Vec<Rational>,
    #[serde(with = "serde_rat::pair")]
    slopes: (Rational, Rational),
}

impl Serialize for Potential {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PotentialWire {
            grid: (*self.grid).clone(),
            values: self.values.clone(),
            slopes: (self.slope_left.clone(), self.slope_right.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Potential {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = PotentialWire::deserialize(d)?;
        Potential::new(Arc::new(w.grid), w.values, w.slopes.0, w.slopes.1)
            .map_err(serde::de::Error::custom)
    }
}
