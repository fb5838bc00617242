use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, serde_rat, Rational};

/// Closed rational interval `[lo, hi]` of slopes. Degenerate intervals
/// (`lo == hi`) are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlopeInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl SlopeInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Validation(format!(
                "empty interval [{}, {}]",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(SlopeInterval { lo, hi })
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, p: &Rational) -> bool {
        &self.lo <= p && p <= &self.hi
    }

    pub fn contains_interval(&self, other: &SlopeInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &SlopeInterval) -> Option<SlopeInterval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(SlopeInterval { lo, hi })
    }
}

impl fmt::Display for SlopeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl Serialize for SlopeInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_rat::pair::serialize(&(self.lo.clone(), self.hi.clone()), s)
    }
}

impl<'de> Deserialize<'de> for SlopeInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi) = serde_rat::pair::deserialize(d)?;
        SlopeInterval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Strictly increasing rational abscissae plus the slope polytope.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridWire")]
pub struct Grid {
    #[serde(with = "serde_rat::vec")]
    nodes: Vec<Rational>,
    polytope: SlopeInterval,
}

#[derive(Deserialize)]
struct GridWire {
    #[serde(with = "serde_rat::vec")]
    nodes: Vec<Rational>,
    polytope: SlopeInterval,
}

impl TryFrom<GridWire> for Grid {
    type Error = Error;

    fn try_from(w: GridWire) -> Result<Self> {
        Grid::new(w.nodes, w.polytope)
    }
}

impl Grid {
    pub fn new(nodes: Vec<Rational>, polytope: SlopeInterval) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("at least two nodes are required".into()));
        }
        if let Some(k) = nodes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "nodes {k} and {} are not strictly increasing",
                k + 1
            )));
        }
        if polytope.is_degenerate() {
            return Err(Error::InvalidGrid("polytope must have p_min < p_max".into()));
        }
        Ok(Grid { nodes, polytope })
    }

    /// `m + 1` equally spaced nodes on `[a, b]` with polytope `[0, 1]`.
    pub fn uniform(a: Rational, b: Rational, intervals: usize) -> Result<Self> {
        if intervals == 0 || a >= b {
            return Err(Error::InvalidGrid("need a < b and at least one interval".into()));
        }
        let step = (&b - &a) / Rational::from_integer(intervals.into());
        let nodes = (0..=intervals)
            .map(|k| &a + &step * Rational::from_integer(k.into()))
            .collect();
        Grid::new(nodes, SlopeInterval { lo: rat(0, 1), hi: rat(1, 1) })
    }

    pub fn nodes(&self) -> &[Rational] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn polytope(&self) -> &SlopeInterval {
        &self.polytope
    }

    pub fn first(&self) -> &Rational {
        &self.nodes[0]
    }

    pub fn last(&self) -> &Rational {
        &self.nodes[self.nodes.len() - 1]
    }

    pub fn index_of(&self, x: &Rational) -> Option<usize> {
        self.nodes.binary_search(x).ok()
    }

    pub fn contains_all(&self, other: &Grid) -> bool {
        other.nodes.iter().all(|x| self.index_of(x).is_some())
    }

    /// Sorted union of the node sets; both grids must share a polytope.
    pub fn union(&self, other: &Grid) -> Result<Grid> {
        if self.polytope != other.polytope {
            return Err(Error::GridMismatch);
        }
        let mut nodes: Vec<Rational> = self.nodes.iter().chain(&other.nodes).cloned().collect();
        nodes.sort();
        nodes.dedup();
        Grid::new(nodes, self.polytope.clone())
    }

    /// This grid with extra abscissae inserted.
    pub fn with_extra(&self, extra: impl IntoIterator<Item = Rational>) -> Result<Grid> {
        let mut nodes = self.nodes.clone();
        nodes.extend(extra);
        nodes.sort();
        nodes.dedup();
        Grid::new(nodes, self.polytope.clone())
    }

    pub fn shared(self) -> Arc<Grid> {
        Arc::new(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn rejects_bad_grids() {
        let unit = SlopeInterval::new(int(0), int(1)).unwrap();
        assert!(Grid::new(vec![int(0)], unit.clone()).is_err());
        assert!(Grid::new(vec![int(0), int(0)], unit.clone()).is_err());
        assert!(Grid::new(vec![int(1), int(0)], unit).is_err());
        let flat = SlopeInterval::new(int(1), int(1)).unwrap();
        assert!(Grid::new(vec![int(0), int(1)], flat).is_err());
    }

    #[test]
    fn interval_ops() {
        let a = SlopeInterval::new(int(0), rat(1, 2)).unwrap();
        let b = SlopeInterval::new(rat(1, 2), int(1)).unwrap();
        let c = SlopeInterval::new(rat(3, 4), int(1)).unwrap();
        assert_eq!(a.intersect(&b).unwrap().length(), int(0));
        assert!(a.intersect(&c).is_none());
        assert!(SlopeInterval::new(int(1), int(0)).is_err());
    }

    #[test]
    fn uniform_and_union() {
        let g = Grid::uniform(int(-1), int(1), 2).unwrap();
        assert_eq!(g.nodes(), &[int(-1), int(0), int(1)]);
        let h = g.with_extra([rat(1, 2), int(0)]).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.contains_all(&g));
        assert_eq!(g.union(&h).unwrap(), h);
    }
}
