use std::sync::Arc;

use num_traits::Zero;

use super::grid::{Grid, SlopeInterval};
use super::potential::Potential;
use crate::error::Result;
use crate::rational::Rational;

/// Piecewise-linear convex function on a closed slope interval, stored as
/// knots `(p, value)` with strictly increasing `p`. The first knot sits at
/// `domain.lo`, the last at `domain.hi`; a degenerate domain has one knot.
///
/// Duals produced here always have slopes (in `p`) equal to grid nodes, which
/// is what makes [`ConvexDual::conjugate_on`] exact on the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexDual {
    domain: SlopeInterval,
    knots: Vec<(Rational, Rational)>,
}

impl ConvexDual {
    pub fn domain(&self) -> &SlopeInterval {
        &self.domain
    }

    pub fn knots(&self) -> &[(Rational, Rational)] {
        &self.knots
    }

    pub fn eval(&self, p: &Rational) -> Option<Rational> {
        if !self.domain.contains(p) {
            return None;
        }
        let i = self.knots.partition_point(|(q, _)| q < p);
        let (q1, v1) = &self.knots[i];
        if q1 == p {
            return Some(v1.clone());
        }
        let (q0, v0) = &self.knots[i - 1];
        Some(v0 + (p - q0) / (q1 - q0) * (v1 - v0))
    }

    fn from_samples(domain: SlopeInterval, mut knots: Vec<(Rational, Rational)>) -> Self {
        knots.dedup_by(|b, a| a.0 == b.0);
        // drop interior knots where the function does not bend
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(knots.len());
        for k in knots {
            while out.len() >= 2 {
                let (p0, v0) = &out[out.len() - 2];
                let (p1, v1) = &out[out.len() - 1];
                if (v1 - v0) * (&k.0 - p1) == (&k.1 - v1) * (p1 - p0) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(k);
        }
        ConvexDual { domain, knots: out }
    }

    /// Restriction to `interval ∩ domain`, `None` when they are disjoint.
    pub fn restrict(&self, interval: &SlopeInterval) -> Option<ConvexDual> {
        let dom = self.domain.intersect(interval)?;
        let mut pts = vec![dom.lo.clone()];
        pts.extend(
            self.knots
                .iter()
                .map(|(p, _)| p)
                .filter(|p| dom.lo < **p && **p < dom.hi)
                .cloned(),
        );
        pts.push(dom.hi.clone());
        let knots = pts
            .into_iter()
            .map(|p| {
                let v = self.eval(&p).expect("point lies in the domain");
                (p, v)
            })
            .collect();
        Some(ConvexDual::from_samples(dom, knots))
    }

    /// Pointwise maximum on the common domain, with crossing points added as
    /// knots. `None` when the domains are disjoint.
    pub fn max(&self, other: &ConvexDual) -> Option<ConvexDual> {
        let dom = self.domain.intersect(&other.domain)?;
        let mut pts: Vec<Rational> = vec![dom.lo.clone(), dom.hi.clone()];
        pts.extend(
            self.knots
                .iter()
                .chain(&other.knots)
                .map(|(p, _)| p)
                .filter(|p| dom.contains(p))
                .cloned(),
        );
        pts.sort();
        pts.dedup();
        let diff = |p: &Rational| self.eval(p).unwrap() - other.eval(p).unwrap();
        let mut crossings = Vec::new();
        for w in pts.windows(2) {
            let (d0, d1) = (diff(&w[0]), diff(&w[1]));
            if !d0.is_zero() && !d1.is_zero() && (d0 > Rational::zero()) != (d1 > Rational::zero()) {
                crossings.push(&w[0] + &d0 / (&d0 - &d1) * (&w[1] - &w[0]));
            }
        }
        pts.extend(crossings);
        pts.sort();
        let knots = pts
            .into_iter()
            .map(|p| {
                let v = self.eval(&p).unwrap().max(other.eval(&p).unwrap());
                (p, v)
            })
            .collect();
        Some(ConvexDual::from_samples(dom, knots))
    }

    /// Conjugate back to the primal, evaluated on `grid`:
    /// `f(x) = max_p (p x - D(p))`, attained at a knot. End slopes are the
    /// domain endpoints.
    pub fn conjugate_on(&self, grid: &Arc<Grid>) -> Result<Potential> {
        let values = grid
            .nodes()
            .iter()
            .map(|x| {
                self.knots
                    .iter()
                    .map(|(p, v)| p * x - v)
                    .max()
                    .expect("dual has at least one knot")
            })
            .collect();
        Potential::new(grid.clone(), values, self.domain.lo.clone(), self.domain.hi.clone())
    }
}

/// Convex conjugate `u*(p) = sup_x (p x - u(x))` on `dual_domain(u)`.
///
/// For `p` between consecutive entries of the slope sequence the supremum is
/// attained at the node they share, so the knots are exactly the end slopes
/// and the chord slopes.
pub fn legendre(u: &Potential) -> ConvexDual {
    let slopes = u.slope_sequence();
    let x = u.grid().nodes();
    let m = x.len() - 1;
    let knots = slopes
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let i = k.min(m);
            (p.clone(), p * &x[i] - &u.values()[i])
        })
        .collect();
    ConvexDual::from_samples(u.dual_domain(), knots)
}

/// `legendre` followed by `conjugate_on` the potential's own grid.
pub fn biconjugate(u: &Potential) -> Result<Potential> {
    legendre(u).conjugate_on(u.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn grid3() -> Arc<Grid> {
        Arc::new(Grid::uniform(int(-1), int(1), 2).unwrap())
    }

    #[test]
    fn dual_of_reference() {
        let r = Potential::new(grid3(), vec![int(0), rat(1, 2), int(1)], int(0), int(1)).unwrap();
        let d = legendre(&r);
        assert_eq!(d.eval(&int(0)), Some(int(0)));
        assert_eq!(d.eval(&rat(1, 2)), Some(rat(-1, 2)));
        assert_eq!(d.eval(&int(1)), Some(int(0)));
        assert_eq!(biconjugate(&r).unwrap(), r);
    }

    #[test]
    fn dual_of_kink_is_zero() {
        let u = Potential::new(grid3(), vec![int(0), int(0), int(1)], int(0), int(1)).unwrap();
        let d = legendre(&u);
        assert_eq!(d.knots(), &[(int(0), int(0)), (int(1), int(0))]);
        for p in [int(0), rat(1, 3), rat(1, 2), int(1)] {
            assert_eq!(d.eval(&p), Some(int(0)));
        }
    }

    #[test]
    fn dual_of_affine_is_a_point() {
        let a = Potential::affine(grid3(), rat(1, 3), int(2)).unwrap();
        let d = legendre(&a);
        assert!(d.domain().is_degenerate());
        assert_eq!(d.knots(), &[(rat(1, 3), int(-2))]);
        assert_eq!(biconjugate(&a).unwrap(), a);
    }

    #[test]
    fn max_adds_crossing() {
        let g = grid3();
        let u = Potential::new(g.clone(), vec![int(0), int(0), int(1)], int(0), int(1)).unwrap();
        let r = Potential::new(g, vec![int(0), rat(1, 2), int(1)], int(0), int(1)).unwrap();
        let m = legendre(&u).max(&legendre(&r.shift(&rat(-1, 4)))).unwrap();
        // r* + 1/4 = 1/4 - p on [0,1/2], p - 3/4 on [1/2,1]; max with 0
        assert_eq!(
            m.knots(),
            &[(int(0), rat(1, 4)), (rat(1, 4), int(0)), (rat(3, 4), int(0)), (int(1), rat(1, 4))]
        );
    }
}
