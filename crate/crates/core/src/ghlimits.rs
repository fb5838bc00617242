//! Finite metric spaces, correspondences, Gromov-Hausdorff bounds, and the
//! convergence experiments along a decreasing model family.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::families::{density_approximant_from, Direction, LevelTables, ModelFamily, SampledFamily};
use crate::grid_convex::{model_project, Potential};
use crate::metric::distance;
use crate::rational::{int, serde_rat, to_f64, Rational};

pub const GH_EXACT_MAX: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceWire", into = "SpaceWire")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    distances: Vec<Vec<Rational>>,
    basepoint: usize,
}

#[derive(Serialize, Deserialize)]
struct SpaceWire {
    labels: Vec<String>,
    distances: Vec<Vec<String>>,
    #[serde(default)]
    basepoint: usize,
}

impl TryFrom<SpaceWire> for FiniteMetricSpace {
    type Error = Error;
    fn try_from(w: SpaceWire) -> Result<Self> {
        let distances = w
            .distances
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| crate::rational::parse_rational(s).ok_or_else(|| Error::Parse(s.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteMetricSpace::new(w.labels, distances, w.basepoint)
    }
}

impl From<FiniteMetricSpace> for SpaceWire {
    fn from(s: FiniteMetricSpace) -> Self {
        SpaceWire {
            distances: s
                .distances
                .iter()
                .map(|r| r.iter().map(crate::rational::format_rational).collect())
                .collect(),
            labels: s.labels,
            basepoint: s.basepoint,
        }
    }
}

impl FiniteMetricSpace {
    /// Checks zero diagonal, symmetry, non-negativity and the triangle
    /// inequality exactly. Distinct points at distance zero are allowed.
    pub fn new(labels: Vec<String>, distances: Vec<Vec<Rational>>, basepoint: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Validation("metric space is empty".into()));
        }
        if distances.len() != n || distances.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("distance matrix is not square".into()));
        }
        if basepoint >= n {
            return Err(Error::Validation(format!("basepoint {basepoint} out of range")));
        }
        for i in 0..n {
            if !distances[i][i].is_zero() {
                return Err(Error::Validation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                if distances[i][j] != distances[j][i] || distances[i][j].is_negative() {
                    return Err(Error::Validation(format!("entry ({i}, {j}) breaks symmetry or sign")));
                }
                for k in 0..n {
                    if distances[i][k] > &distances[i][j] + &distances[j][k] {
                        return Err(Error::Validation(format!("triangle ({i}, {j}, {k}) fails")));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, distances, basepoint })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.distances[i][j]
    }
}

/// Relation between two finite spaces that is total on both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(x: &FiniteMetricSpace, y: &FiniteMetricSpace, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(a, b)) = pairs.iter().find(|(a, b)| *a >= x.len() || *b >= y.len()) {
            return Err(Error::NotTotal(format!("pair ({a}, {b}) out of range")));
        }
        let left: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
        let right: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
        if let Some(a) = (0..x.len()).find(|a| !left.contains(a)) {
            return Err(Error::NotTotal(format!("left point {a} unmatched")));
        }
        if let Some(b) = (0..y.len()).find(|b| !right.contains(b)) {
            return Err(Error::NotTotal(format!("right point {b} unmatched")));
        }
        Ok(Correspondence { pairs })
    }

    pub fn identity(x: &FiniteMetricSpace) -> Self {
        Correspondence { pairs: (0..x.len()).map(|i| (i, i)).collect() }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// `max |d_X(x, x') - d_Y(y, y')|` over related pairs.
pub fn distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace, r: &Correspondence) -> Result<Rational> {
    Correspondence::new(x, y, r.pairs.clone())?;
    let mut worst = Rational::zero();
    for (i, &(a, b)) in r.pairs.iter().enumerate() {
        for &(c, d) in &r.pairs[i + 1..] {
            let gap = (x.d(a, c) - y.d(b, d)).abs();
            if gap > worst {
                worst = gap;
            }
        }
    }
    Ok(worst)
}

/// Half the distortion: an upper bound for the GH distance.
pub fn gh_upper(x: &FiniteMetricSpace, y: &FiniteMetricSpace, r: &Correspondence) -> Result<Rational> {
    Ok(distortion(x, y, r)? / int(2))
}

#[derive(Clone, Debug, Serialize)]
pub struct GhExact {
    #[serde(with = "serde_rat")]
    pub value: Rational,
    pub correspondence: Correspondence,
}

/// Exact GH distance by branch and bound over correspondences of the form
/// `graph(f) ∪ graph(g)^T`; every correspondence contains one of these and
/// distortion is monotone under inclusion.
pub fn gh_exact(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<GhExact> {
    for s in [x, y] {
        if s.len() > GH_EXACT_MAX {
            return Err(Error::TooLarge(s.len()));
        }
    }
    // rank every possible gap so the search runs on integers
    let (nx, ny) = (x.len(), y.len());
    let mut values: Vec<Rational> = Vec::new();
    for a in 0..nx {
        for c in 0..nx {
            for b in 0..ny {
                for d in 0..ny {
                    values.push((x.d(a, c) - y.d(b, d)).abs());
                }
            }
        }
    }
    let mut sorted = values.clone();
    sorted.sort();
    sorted.dedup();
    let rank: Vec<u32> = values.iter().map(|v| sorted.binary_search(v).expect("present") as u32).collect();
    let gap = |a: usize, b: usize, c: usize, d: usize| rank[((a * nx + c) * ny + b) * ny + d];

    let total = nx + ny;
    let mut search = Search { best: u32::MAX, best_pairs: Vec::new(), pairs: Vec::new() };
    fn step(
        s: &mut Search,
        depth: usize,
        nx: usize,
        ny: usize,
        total: usize,
        current: u32,
        gap: &dyn Fn(usize, usize, usize, usize) -> u32,
    ) {
        if current >= s.best {
            return;
        }
        if depth == total {
            s.best = current;
            s.best_pairs = s.pairs.clone();
            return;
        }
        let choices = if depth < nx { ny } else { nx };
        for c in 0..choices {
            let pair = if depth < nx { (depth, c) } else { (c, depth - nx) };
            let worst = s.pairs.iter().map(|&(a, b)| gap(a, b, pair.0, pair.1)).fold(current, u32::max);
            s.pairs.push(pair);
            step(s, depth + 1, nx, ny, total, worst, gap);
            s.pairs.pop();
        }
    }
    step(&mut search, 0, nx, ny, total, 0, &gap);
    let mut pairs = search.best_pairs;
    pairs.sort();
    pairs.dedup();
    Ok(GhExact {
        value: sorted[search.best as usize].clone() / int(2),
        correspondence: Correspondence { pairs },
    })
}

struct Search {
    best: u32,
    best_pairs: Vec<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
}

/// Spaces of distinct projections of `members` at `level` and at the limit,
/// with the canonical correspondence `(P_k m, P m)`.
pub fn canonical_correspondence(
    tables: &LevelTables,
    level: usize,
    members: &[usize],
) -> Result<(FiniteMetricSpace, FiniteMetricSpace, Correspondence)> {
    let lim = tables.images.len() - 1;
    let dedup = |k: usize| -> (Vec<usize>, Vec<usize>) {
        let mut reps: Vec<usize> = Vec::new();
        let mut index = Vec::new();
        for &m in members {
            match reps.iter().position(|&r| tables.images[k][r] == tables.images[k][m]) {
                Some(i) => index.push(i),
                None => {
                    index.push(reps.len());
                    reps.push(m);
                }
            }
        }
        (reps, index)
    };
    let space = |k: usize, reps: &[usize]| {
        let d = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| tables.distances[k][a][b].clone()).collect())
            .collect();
        FiniteMetricSpace::new(reps.iter().map(|m| format!("m{m}")).collect(), d, 0)
    };
    let (rx, ix) = dedup(level);
    let (ry, iy) = dedup(lim);
    let x = space(level, &rx)?;
    let y = space(lim, &ry)?;
    let mut pairs: Vec<(usize, usize)> = ix.into_iter().zip(iy).collect();
    pairs.sort();
    pairs.dedup();
    let r = Correspondence::new(&x, &y, pairs)?;
    Ok((x, y, r))
}

#[derive(Clone, Debug, Serialize)]
pub struct CpghRow {
    pub cap: f64,
    /// 1-based level index.
    pub level: usize,
    pub points: usize,
    #[serde(with = "serde_rat")]
    pub distortion: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct CpghTable {
    pub rows: Vec<CpghRow>,
    pub monotone: bool,
    pub final_below_tolerance: bool,
    pub tolerance: f64,
    pub pass: bool,
}

impl CpghTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cap,level,distortion_num,distortion_den,float\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.cap,
                r.level,
                r.distortion.numer(),
                r.distortion.denom(),
                to_f64(&r.distortion)
            ));
        }
        out
    }

    pub fn series(&self, cap: f64) -> Vec<Rational> {
        self.rows.iter().filter(|r| r.cap == cap).map(|r| r.distortion.clone()).collect()
    }
}

/// Distortion of the canonical correspondence between the level-`k`
/// projections of each capped sample and its limit projection. The
/// sample must contain a member whose projections are the envelopes
/// themselves (the reference), which serves as the basepoint.
pub fn cpgh_experiment(
    family: &ModelFamily,
    samples: &SampledFamily,
    caps: &[f64],
    tolerance: f64,
) -> Result<CpghTable> {
    if family.direction() != Direction::Decreasing {
        return Err(Error::ScheduleInvalid("cp-GH needs a decreasing family".into()));
    }
    if caps.is_empty() {
        return Err(Error::ScheduleInvalid("no caps".into()));
    }
    let tables = LevelTables::build(family, &samples.members)?;
    cpgh_from_tables(family, samples, &tables, caps, tolerance)
}

pub fn cpgh_from_tables(
    family: &ModelFamily,
    samples: &SampledFamily,
    tables: &LevelTables,
    caps: &[f64],
    tolerance: f64,
) -> Result<CpghTable> {
    let base = (0..samples.len())
        .find(|&m| family.all_levels().enumerate().all(|(k, psi)| &tables.images[k][m] == psi.potential()))
        .ok_or_else(|| Error::ScheduleInvalid("sample lacks the basepoint".into()))?;
    let mut rows = Vec::new();
    let mut monotone = true;
    let mut final_ok = true;
    for &cap in caps {
        let mut members = samples.within(cap);
        if !members.contains(&base) {
            members.insert(0, base);
        }
        let defects = tables.uniform_defects(&members);
        let levels = &defects[..defects.len() - 1];
        monotone &= levels.windows(2).all(|w| w[1] <= w[0]);
        final_ok &= levels.last().is_none_or(|d| to_f64(d) < tolerance);
        for (k, d) in levels.iter().enumerate() {
            rows.push(CpghRow { cap, level: k + 1, points: members.len(), distortion: d.clone() });
        }
    }
    Ok(CpghTable { rows, monotone, final_below_tolerance: final_ok, tolerance, pass: monotone && final_ok })
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectLimitReport {
    pub lipschitz_checks: usize,
    pub lipschitz_pass: bool,
    pub composition_checks: usize,
    pub composition_pass: bool,
    /// Per limit-level sample and per level: distances to the density
    /// approximants along `steps`.
    #[serde(with = "serde_rat::vec")]
    pub steps: Vec<Rational>,
    pub density: Vec<Vec<Vec<String>>>,
    pub density_pass: bool,
    pub tolerance: f64,
    pub witness: Option<String>,
    pub pass: bool,
}

/// Exact checks of the projection system `P_{k,j} = P[psi_j]` restricted to
/// level `k`, for `k <= j` (limit last):
/// 1-Lipschitz, `P_{j,l} ∘ P_{k,j} == P_{k,l}`, and decay of
/// `d(u, P[psi](max(u, psi_k - t)))` along `steps` for limit-level `u`.
pub fn direct_limit_check(
    family: &ModelFamily,
    samples: &[Potential],
    steps: &[Rational],
    tolerance: f64,
) -> Result<DirectLimitReport> {
    if family.direction() != Direction::Decreasing {
        return Err(Error::PreconditionViolated("direct limits need a decreasing family".into()));
    }
    let tables = LevelTables::build(family, samples)?;
    let levels: Vec<_> = family.all_levels().collect();
    let lim = levels.len() - 1;
    let n = samples.len();
    let mut witness = None;

    let mut lipschitz_checks = 0;
    let mut lipschitz_pass = true;
    let mut composition_checks = 0;
    let mut composition_pass = true;
    for k in 0..=lim {
        for j in k..=lim {
            // P_{k,j} applied to level-k images
            let moved: Vec<Potential> =
                tables.images[k].iter().map(|u| model_project(levels[j], u)).collect::<Result<_>>()?;
            for (m, (mv, img)) in moved.iter().zip(&tables.images[j]).enumerate() {
                composition_checks += 1;
                if mv != img {
                    composition_pass = false;
                    witness.get_or_insert(format!("composition k={k} j={j} member={m}"));
                }
            }
            for (l, level) in levels.iter().enumerate().take(lim + 1).skip(j) {
                for (m, (mv, img)) in moved.iter().zip(&tables.images[k]).enumerate() {
                    composition_checks += 1;
                    if model_project(level, mv)? != model_project(level, img)? {
                        composition_pass = false;
                        witness.get_or_insert(format!("composition k={k} j={j} l={l} member={m}"));
                    }
                }
            }
            let ctx = EnergyContext::new(levels[j].clone());
            for a in 0..n {
                for b in a + 1..n {
                    lipschitz_checks += 1;
                    if distance(&ctx, &moved[a], &moved[b])? > tables.distances[k][a][b] {
                        lipschitz_pass = false;
                        witness.get_or_insert(format!("lipschitz k={k} j={j} pair=({a}, {b})"));
                    }
                }
            }
        }
    }

    let psi = levels[lim];
    let ctx = EnergyContext::new(psi.clone());
    let mut density = Vec::new();
    let mut density_pass = true;
    for (m, u) in tables.images[lim].iter().enumerate() {
        let mut per_level = Vec::new();
        for (k, level) in levels[..lim].iter().enumerate() {
            let mut row = Vec::new();
            let mut prev: Option<Rational> = None;
            for t in steps {
                let v = density_approximant_from(psi, u, &level.potential().shift(&-t))?;
                let d = distance(&ctx, u, &v)?;
                if prev.as_ref().is_some_and(|p| &d > p) {
                    density_pass = false;
                    witness.get_or_insert(format!("density member={m} level={k} step={t}"));
                }
                row.push(crate::rational::format_rational(&d));
                prev = Some(d);
            }
            if prev.as_ref().is_some_and(|p| to_f64(p) > tolerance) {
                density_pass = false;
                witness.get_or_insert(format!("density member={m} level={k} did not reach tolerance"));
            }
            per_level.push(row);
        }
        density.push(per_level);
    }
    Ok(DirectLimitReport {
        lipschitz_checks,
        lipschitz_pass,
        composition_checks,
        composition_pass,
        steps: steps.to_vec(),
        density,
        density_pass,
        tolerance,
        witness,
        pass: lipschitz_pass && composition_pass && density_pass,
    })
}
