//! The cross-level quasi-distance `d̃_A` and its chain metrization `d_A` on
//! the disjoint union of the sectors of a model family.
//!
//! Points are projections of sampled members: the point `(k, m)` is
//! `P[psi_k](m)`, and its cap is the smallest member cap among members with
//! the same projection. Every distance needed is then an entry of the
//! per-level tables of [`LevelTables`].

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{LevelTables, ModelFamily, SampledFamily};
use crate::grid_convex::Potential;
use crate::rational::{serde_rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BigPoint {
    pub level: usize,
    pub member: usize,
}

/// The three summands of `d̃_A`. `sup_term` is a maximum over a finite
/// sample, so it and `value` are lower bounds for the continuous quantity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TildeTerms {
    #[serde(with = "serde_rat")]
    pub projection_term: Rational,
    #[serde(with = "serde_rat")]
    pub sup_term: Rational,
    #[serde(with = "serde_rat")]
    pub volume_term: Rational,
    #[serde(with = "serde_rat")]
    pub value: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainDistance {
    #[serde(with = "serde_rat")]
    pub value: Rational,
    /// Per-edge terms along the optimal chain.
    pub lower_bound_terms: Vec<TildeTerms>,
    /// Vertex indices: `0` is `p`, `i + 1` is `nodes[i]`, `nodes.len() + 1` is `q`.
    pub chain: Vec<usize>,
}

pub struct BigSpace {
    family: ModelFamily,
    samples: SampledFamily,
    tables: LevelTables,
    point_caps: Vec<Vec<f64>>,
    masses: Vec<Rational>,
    /// Member indices sorted by cap.
    cap_order: Vec<usize>,
    /// `sup_prefix[hi][lo][r]`: largest `d_hi(a,b) - d_lo(a,b)` over pairs
    /// among the first `r + 1` members of `cap_order`.
    sup_prefix: Vec<Vec<Vec<Rational>>>,
}

impl BigSpace {
    pub fn new(family: ModelFamily, samples: SampledFamily) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let tables = LevelTables::build(&family, &samples.members)?;
        let levels = family.level_count();
        let n = samples.len();
        let point_caps = tables
            .images
            .iter()
            .map(|imgs| {
                (0..n)
                    .map(|m| {
                        (0..n)
                            .filter(|&o| imgs[o] == imgs[m])
                            .map(|o| samples.member_caps[o])
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect()
            })
            .collect();
        let masses = family.all_levels().map(|psi| psi.mass()).collect();
        let mut cap_order: Vec<usize> = (0..n).collect();
        cap_order.sort_by(|&a, &b| {
            samples.member_caps[a].partial_cmp(&samples.member_caps[b]).unwrap_or(Ordering::Equal)
        });
        let mut sup_prefix = vec![vec![Vec::new(); levels]; levels];
        for (dh, prefix_row) in tables.distances.iter().zip(sup_prefix.iter_mut()) {
            for (dl, slot) in tables.distances.iter().zip(prefix_row.iter_mut()) {
                let mut best = Rational::zero();
                let mut row = Vec::with_capacity(n);
                for r in 0..n {
                    let a = cap_order[r];
                    for &b in &cap_order[..r] {
                        let gap = &dh[a][b] - &dl[a][b];
                        if gap > best {
                            best = gap;
                        }
                    }
                    row.push(best.clone());
                }
                *slot = row;
            }
        }
        Ok(BigSpace { family, samples, tables, point_caps, masses, cap_order, sup_prefix })
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn samples(&self) -> &SampledFamily {
        &self.samples
    }

    pub fn tables(&self) -> &LevelTables {
        &self.tables
    }

    pub fn level_count(&self) -> usize {
        self.masses.len()
    }

    pub fn point(&self, level: usize, member: usize) -> Result<BigPoint> {
        if level >= self.level_count() || member >= self.samples.len() {
            return Err(Error::PreconditionViolated(format!("no point ({level}, {member})")));
        }
        Ok(BigPoint { level, member })
    }

    pub fn potential(&self, p: BigPoint) -> &Potential {
        &self.tables.images[p.level][p.member]
    }

    pub fn cap(&self, p: BigPoint) -> f64 {
        self.point_caps[p.level][p.member]
    }

    pub fn mass(&self, p: BigPoint) -> &Rational {
        &self.masses[p.level]
    }

    /// Distance inside a single level.
    pub fn level_distance(&self, p: BigPoint, q: BigPoint) -> Result<Rational> {
        if p.level != q.level {
            return Err(Error::SingularityMismatch);
        }
        Ok(self.tables.distances[p.level][p.member][q.member].clone())
    }

    /// `true` when level `a` is at most as singular as level `b`.
    fn above(&self, a: usize, b: usize) -> bool {
        self.family.level(a).interval().contains_interval(self.family.level(b).interval())
    }

    fn sup_term(&self, hi: usize, lo: usize, cap: f64) -> Rational {
        let within = self.cap_order.partition_point(|&m| self.samples.member_caps[m] <= cap);
        match within {
            0 => Rational::zero(),
            r => self.sup_prefix[hi][lo][r - 1].clone(),
        }
    }

    pub fn tilde_terms(&self, p: BigPoint, q: BigPoint) -> Result<TildeTerms> {
        let (u, v) = if self.above(p.level, q.level) {
            (p, q)
        } else if self.above(q.level, p.level) {
            (q, p)
        } else {
            return Err(Error::LevelsNotOrdered);
        };
        // P[psi_v](P[psi_u] m) = P[psi_v] m, so the projection of u is a table entry
        let projection_term = self.tables.distances[v.level][v.member][u.member].clone();
        let cap = self.cap(u).max(self.cap(v));
        let sup_term = self.sup_term(u.level, v.level, cap);
        let volume_term = &self.masses[u.level] - &self.masses[v.level];
        let value = &projection_term + &sup_term + &volume_term;
        Ok(TildeTerms { projection_term, sup_term, volume_term, value })
    }

    pub fn tilde_da(&self, p: BigPoint, q: BigPoint) -> Result<Rational> {
        Ok(self.tilde_terms(p, q)?.value)
    }

    /// Shortest chain from `p` to `q` through `nodes` under `d̃_A` edge weights.
    pub fn da(&self, p: BigPoint, q: BigPoint, nodes: &[BigPoint]) -> Result<ChainDistance> {
        let mut verts = Vec::with_capacity(nodes.len() + 2);
        verts.push(p);
        verts.extend_from_slice(nodes);
        verts.push(q);
        let n = verts.len();
        let mut weight = vec![vec![Rational::zero(); n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let w = self.tilde_da(verts[a], verts[b])?;
                weight[a][b] = w.clone();
                weight[b][a] = w;
            }
        }
        let (dist, prev) = dijkstra(&weight, 0);
        let target = n - 1;
        let mut chain = vec![target];
        while let Some(&Some(before)) = prev.get(*chain.last().expect("nonempty")) {
            chain.push(before);
        }
        chain.reverse();
        let lower_bound_terms = chain
            .windows(2)
            .map(|w| self.tilde_terms(verts[w[0]], verts[w[1]]))
            .collect::<Result<_>>()?;
        Ok(ChainDistance {
            value: dist[target].clone().expect("complete graph"),
            lower_bound_terms,
            chain,
        })
    }

    /// Compares `d_A` with the level distance on all pairs of `members` at
    /// `level`, for each node pool.
    pub fn level_restriction_check(
        &self,
        level: usize,
        members: &[usize],
        pools: &[Vec<BigPoint>],
    ) -> Result<RestrictionReport> {
        let mut max_defect = Rational::zero();
        let mut min_defect = Rational::zero();
        let mut witness = None;
        let mut pairs = 0;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                let (p, q) = (self.point(level, a)?, self.point(level, b)?);
                let d = self.level_distance(p, q)?;
                for pool in pools {
                    let defect = self.da(p, q, pool)?.value - &d;
                    pairs += 1;
                    if defect.abs() > max_defect.abs() {
                        witness = Some((a, b));
                        max_defect = defect.clone();
                    }
                    if defect < min_defect {
                        min_defect = defect;
                    }
                }
            }
        }
        Ok(RestrictionReport {
            pass: max_defect.is_zero(),
            max_defect,
            min_defect,
            comparisons: pairs,
            witness,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    /// Largest `|d_A - d|` seen, with sign.
    #[serde(with = "serde_rat")]
    pub max_defect: Rational,
    #[serde(with = "serde_rat")]
    pub min_defect: Rational,
    pub comparisons: usize,
    pub witness: Option<(usize, usize)>,
    pub pass: bool,
}

/// Dense Dijkstra on a symmetric nonnegative weight matrix.
fn dijkstra(weight: &[Vec<Rational>], source: usize) -> (Vec<Option<Rational>>, Vec<Option<usize>>) {
    let n = weight.len();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut prev = vec![None; n];
    let mut done = vec![false; n];
    dist[source] = Some(Rational::zero());
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&i| !done[i] && dist[i].is_some())
            .min_by(|&a, &b| dist[a].cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        let du = dist[u].clone().expect("reached");
        for v in 0..n {
            if done[v] {
                continue;
            }
            let alt = &du + &weight[u][v];
            if dist[v].as_ref().is_none_or(|d| &alt < d) {
                dist[v] = Some(alt);
                prev[v] = Some(u);
            }
        }
    }
    (dist, prev)
}
