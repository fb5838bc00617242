//! Totally ordered families of model envelopes and finite entropy-capped
//! samples standing in for the compact sets `K_C`.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::grid_convex::{
    compare_singularity, is_model_type, model_project, pointwise_max, ModelEnvelope, Potential,
    Singularity, SlopeInterval,
};
use crate::measures::{entropy, ma};
use crate::metric::distance;
use crate::rational::{serde_rat, to_f64, Rational};
use crate::sampling::{random_potential, trial_rng, Setting};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Decreasing,
    Increasing,
}

/// Monotone sequence of model envelopes with an explicit limit level.
#[derive(Clone, Debug)]
pub struct ModelFamily {
    levels: Vec<ModelEnvelope>,
    limit: ModelEnvelope,
    direction: Direction,
}

impl ModelFamily {
    /// Levels must be nested by inclusion of their slope intervals (all
    /// shrinking or all growing, repeats allowed) and the limit must sit at
    /// the end of that chain.
    pub fn new(
        setting: &Setting,
        levels: &[SlopeInterval],
        limit: &SlopeInterval,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::ScheduleInvalid("no levels".into()));
        }
        let mut chain: Vec<&SlopeInterval> = levels.iter().collect();
        chain.push(limit);
        let shrinking = chain.windows(2).all(|w| w[0].contains_interval(w[1]));
        let growing = chain.windows(2).all(|w| w[1].contains_interval(w[0]));
        let direction = match (shrinking, growing) {
            (true, _) => Direction::Decreasing,
            (false, true) => Direction::Increasing,
            (false, false) => return Err(Error::LevelsNotOrdered),
        };
        let build = |q: &SlopeInterval| ModelEnvelope::from_interval(setting.reference(), q.clone());
        let levels = levels.iter().map(build).collect::<Result<Vec<_>>>()?;
        let limit = build(limit)?;
        Ok(ModelFamily { levels, limit, direction })
    }

    pub fn levels(&self) -> &[ModelEnvelope] {
        &self.levels
    }

    pub fn limit(&self) -> &ModelEnvelope {
        &self.limit
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Levels followed by the limit.
    pub fn all_levels(&self) -> impl Iterator<Item = &ModelEnvelope> {
        self.levels.iter().chain(std::iter::once(&self.limit))
    }

    pub fn level(&self, index: usize) -> &ModelEnvelope {
        if index == self.levels.len() {
            &self.limit
        } else {
            &self.levels[index]
        }
    }

    pub fn level_count(&self) -> usize {
        self.levels.len() + 1
    }

    /// The limit envelope is a fixed point of its own projection.
    pub fn limit_is_model_type(&self, setting: &Setting) -> Result<bool> {
        is_model_type(setting.reference(), self.limit.potential())
    }
}

/// `C(u) = max(|sup(u - ref)|, H(MA(u)/V | MA(ref)/V))`, the smallest cap
/// whose set `K_C` contains `u`.
pub fn minimal_cap(setting: &Setting, u: &Potential) -> Result<f64> {
    let reference = setting.reference();
    if u.dual_domain() != *setting.polytope() {
        return Err(Error::PreconditionViolated("samples must have full mass".into()));
    }
    let sup = crate::grid_convex::sup_diff(u, reference)?
        .finite()
        .ok_or(Error::SingularityMismatch)?;
    let nu = ma(u).normalized().ok_or(Error::ZeroMass)?;
    let mu = ma(reference).normalized().ok_or(Error::ZeroMass)?;
    let h = entropy(&nu.refine(mu.grid())?, &mu)?.value;
    Ok(to_f64(&sup.abs()).max(h))
}

/// Finite sample of full-mass potentials with their individual caps.
#[derive(Clone, Debug, Serialize)]
pub struct SampledFamily {
    pub members: Vec<Potential>,
    /// `minimal_cap` of each member.
    pub member_caps: Vec<f64>,
    pub cap: f64,
    #[serde(with = "serde_rat")]
    pub sup_bound: Rational,
}

impl SampledFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Indices of members with `minimal_cap <= cap`.
    pub fn within(&self, cap: f64) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.member_caps[i] <= cap).collect()
    }
}

/// Keeps exactly the candidates with `|sup(u - ref)| <= sup_bound` and
/// entropy at most `cap`, preserving order.
pub fn entropy_cap_filter(
    setting: &Setting,
    candidates: &[Potential],
    cap: f64,
    sup_bound: &Rational,
) -> Result<SampledFamily> {
    Setting::new(setting.reference().clone())?;
    let reference = setting.reference();
    let mut members = Vec::new();
    let mut member_caps = Vec::new();
    let mu = ma(reference).normalized().ok_or(Error::ZeroMass)?;
    for u in candidates {
        let sup = crate::grid_convex::sup_diff(u, reference)?
            .finite()
            .ok_or(Error::SingularityMismatch)?;
        if &sup.abs() > sup_bound {
            continue;
        }
        let nu = ma(u).normalized().ok_or(Error::ZeroMass)?;
        let h = entropy(&nu.refine(mu.grid())?, &mu)?.value;
        if h <= cap {
            members.push(u.clone());
            member_caps.push(to_f64(&sup.abs()).max(h));
        }
    }
    Ok(SampledFamily { members, member_caps, cap, sup_bound: sup_bound.clone() })
}

/// Seeded sample generator: `count` random full-mass potentials with
/// chord slopes on a `denominator` lattice and sup normalized to a random
/// multiple of `1/4` in `[-1, 1]`, preceded by the reference itself.
pub fn generate_candidates(setting: &Setting, seed: u64, count: usize, denominator: u32) -> Vec<Potential> {
    let mut out = vec![setting.reference().clone()];
    for t in 0..count {
        let mut rng = trial_rng(seed, t as u64);
        let u = random_potential(&mut rng, setting.grid(), setting.polytope(), denominator);
        let target = crate::rational::rat(rand::Rng::gen_range(&mut rng, -4..=4), 4);
        let u = crate::sampling::normalize_sup(&u, setting.reference(), &target)
            .expect("full-mass sample");
        out.push(u);
    }
    out
}

/// Memberwise projection `P[psi](F)`; member `i` maps to `images[i]`.
#[derive(Clone, Debug)]
pub struct ProjectedFamily {
    pub interval: SlopeInterval,
    pub images: Vec<Potential>,
}

impl ProjectedFamily {
    /// Groups member indices by identical image.
    pub fn fibers(&self) -> Vec<(Potential, Vec<usize>)> {
        let mut out: Vec<(Potential, Vec<usize>)> = Vec::new();
        for (i, img) in self.images.iter().enumerate() {
            match out.iter_mut().find(|(p, _)| p == img) {
                Some((_, v)) => v.push(i),
                None => out.push((img.clone(), vec![i])),
            }
        }
        out
    }
}

pub fn project_family(psi: &ModelEnvelope, members: &[Potential]) -> Result<ProjectedFamily> {
    let images = members.iter().map(|u| model_project(psi, u)).collect::<Result<_>>()?;
    Ok(ProjectedFamily { interval: psi.interval().clone(), images })
}

/// `P[psi](max(u, ref - j))`: decreasing in `j` and stabilizing at `u` once
/// `ref - j` falls below `u` on the grid.
pub fn density_approximant(
    setting: &Setting,
    psi: &ModelEnvelope,
    u: &Potential,
    j: &Rational,
) -> Result<Potential> {
    density_approximant_from(psi, u, &setting.reference().shift(&-j))
}

/// `P[psi](max(u, floor))` for an arbitrary lower barrier.
pub fn density_approximant_from(
    psi: &ModelEnvelope,
    u: &Potential,
    floor: &Potential,
) -> Result<Potential> {
    if !matches!(
        compare_singularity(u, psi.potential()),
        Singularity::MoreSingular | Singularity::Equivalent
    ) {
        return Err(Error::PreconditionViolated("u must be more singular than psi".into()));
    }
    model_project(psi, &pointwise_max(u, floor)?)
}

/// Pairwise distances of the projections of one member list at every
/// level of a family (limit last).
#[derive(Clone, Debug)]
pub struct LevelTables {
    pub images: Vec<Vec<Potential>>,
    pub distances: Vec<Vec<Vec<Rational>>>,
}

impl LevelTables {
    pub fn build(family: &ModelFamily, members: &[Potential]) -> Result<Self> {
        let mut images = Vec::new();
        let mut distances = Vec::new();
        for psi in family.all_levels() {
            let ctx = EnergyContext::new(psi.clone());
            let imgs = project_family(psi, members)?.images;
            let n = imgs.len();
            let mut table = vec![vec![Rational::from_integer(0.into()); n]; n];
            for a in 0..n {
                for b in a + 1..n {
                    let d = distance(&ctx, &imgs[a], &imgs[b])?;
                    table[a][b] = d.clone();
                    table[b][a] = d;
                }
            }
            images.push(imgs);
            distances.push(table);
        }
        Ok(LevelTables { images, distances })
    }

    /// `max_{a,b} |d_k(a_k, b_k) - d(a, b)|` over the given members, per level.
    pub fn uniform_defects(&self, members: &[usize]) -> Vec<Rational> {
        let lim = self.distances.len() - 1;
        self.distances
            .iter()
            .map(|t| {
                let mut worst = Rational::from_integer(0.into());
                for &a in members {
                    for &b in members {
                        let d = (&t[a][b] - &self.distances[lim][a][b]).abs();
                        if d > worst {
                            worst = d;
                        }
                    }
                }
                worst
            })
            .collect()
    }
}

/// Distances `d_k(u_{1,k}, u_{2,k})` along a family against the limit value.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    #[serde(with = "serde_rat::vec")]
    pub distances: Vec<Rational>,
    #[serde(with = "serde_rat")]
    pub limit: Rational,
    #[serde(with = "serde_rat::vec")]
    pub defects: Vec<Rational>,
    pub monotone: bool,
    pub pass: bool,
}

/// Sequences hold one potential per level plus a final one at the limit
/// level. Passes when the defects never increase and the last level is
/// within `tolerance` of the limit distance.
pub fn monotone_distance_convergence(
    family: &ModelFamily,
    first: &[Potential],
    second: &[Potential],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    let n = family.level_count();
    if first.len() != n || second.len() != n {
        return Err(Error::PreconditionViolated(format!(
            "expected {n} potentials per sequence"
        )));
    }
    let mut all = Vec::with_capacity(n);
    for (k, psi) in family.all_levels().enumerate() {
        let ctx = EnergyContext::new(psi.clone());
        if !ctx.in_sector(&first[k]) || !ctx.in_sector(&second[k]) {
            return Err(Error::PreconditionViolated(format!("level {k} potentials outside sector")));
        }
        all.push(distance(&ctx, &first[k], &second[k])?);
    }
    let limit = all.pop().expect("at least one level");
    let defects: Vec<Rational> = all.iter().map(|d| (d - &limit).abs()).collect();
    let monotone = defects.windows(2).all(|w| w[1] <= w[0]);
    let last = defects.last().map(to_f64).unwrap_or(0.0);
    Ok(ConvergenceReport { pass: monotone && last <= tolerance, distances: all, limit, defects, monotone })
}

/// `P[psi_k](phi)` for every level, limit last.
pub fn projected_sequence(family: &ModelFamily, phi: &Potential) -> Result<Vec<Potential>> {
    family.all_levels().map(|psi| model_project(psi, phi)).collect()
}

/// JSON schedule: `{levels:[{Q:[a,b]},…], limit:{Q:[a,b]}, samples:{seed, count, caps}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySchedule {
    pub levels: Vec<LevelSpec>,
    pub limit: LevelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    #[serde(rename = "Q")]
    pub q: SlopeInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub caps: Vec<f64>,
    #[serde(default = "default_denominator")]
    pub denominator: u32,
}

fn default_denominator() -> u32 {
    8
}

impl FamilySchedule {
    pub fn build(&self, setting: &Setting) -> Result<ModelFamily> {
        let levels: Vec<SlopeInterval> = self.levels.iter().map(|l| l.q.clone()).collect();
        ModelFamily::new(setting, &levels, &self.limit.q)
    }

    /// Candidates filtered at the largest cap, with each member's own cap
    /// recorded so smaller caps are sub-selections.
    pub fn sample(&self, setting: &Setting) -> Result<Option<SampledFamily>> {
        let Some(spec) = &self.samples else { return Ok(None) };
        let top = spec.caps.iter().cloned().fold(0.0, f64::max);
        let candidates = generate_candidates(setting, spec.seed, spec.count, spec.denominator);
        let bound = Rational::from_float(top).ok_or_else(|| Error::ScheduleInvalid("bad cap".into()))?;
        entropy_cap_filter(setting, &candidates, top, &bound).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn interval(a: Rational, b: Rational) -> SlopeInterval {
        SlopeInterval::new(a, b).unwrap()
    }

    #[test]
    fn family_order_is_checked() {
        let s = Setting::standard(4);
        let dec = ModelFamily::new(
            &s,
            &[interval(int(0), int(1)), interval(int(0), rat(3, 4))],
            &interval(int(0), rat(1, 2)),
        )
        .unwrap();
        assert_eq!(dec.direction(), Direction::Decreasing);
        assert!(dec.limit_is_model_type(&s).unwrap());
        let inc = ModelFamily::new(&s, &[interval(int(0), rat(1, 2))], &interval(int(0), int(1))).unwrap();
        assert_eq!(inc.direction(), Direction::Increasing);
        let bad = ModelFamily::new(
            &s,
            &[interval(int(0), rat(1, 2)), interval(rat(1, 2), int(1))],
            &interval(int(0), int(1)),
        );
        assert!(matches!(bad, Err(Error::LevelsNotOrdered)));
    }

    #[test]
    fn projection_examples() {
        let c = Setting::canonical();
        let kink = Potential::new(c.grid().clone(), vec![int(0), int(0), int(1)], int(0), int(1)).unwrap();
        let full = ModelEnvelope::from_interval(c.reference(), interval(int(0), int(1))).unwrap();
        assert_eq!(project_family(&full, std::slice::from_ref(&kink)).unwrap().images, vec![kink.clone()]);
        let half = ModelEnvelope::from_interval(c.reference(), interval(int(0), rat(1, 2))).unwrap();
        let img = project_family(&half, std::slice::from_ref(&kink)).unwrap().images;
        assert_eq!(img[0].values(), &[int(0), int(0), rat(1, 2)]);
        let quarter = ModelEnvelope::from_interval(c.reference(), interval(int(0), rat(1, 4))).unwrap();
        let twice = project_family(&quarter, &project_family(&half, std::slice::from_ref(&kink)).unwrap().images).unwrap();
        assert_eq!(twice.images, project_family(&quarter, &[kink]).unwrap().images);
    }

    #[test]
    fn filter_examples() {
        let s = Setting::standard(4);
        let cands = generate_candidates(&s, 5, 12, 8);
        let all = entropy_cap_filter(&s, &cands, f64::INFINITY, &int(10)).unwrap();
        assert_eq!(all.len(), cands.len());
        let tight = entropy_cap_filter(&s, &cands, f64::INFINITY, &int(0)).unwrap();
        assert!(!tight.is_empty());
        for u in &tight.members {
            assert_eq!(crate::grid_convex::sup_diff(u, s.reference()).unwrap().finite(), Some(int(0)));
        }
        // a point mass where the reference carries a quarter of its mass
        let grid = s.grid().clone();
        let spike = Potential::new(
            grid.clone(),
            grid.nodes().iter().map(|x| if x < &int(0) { int(0) } else { x.clone() }).collect(),
            int(0),
            int(1),
        )
        .unwrap();
        let h = minimal_cap(&s, &spike).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-12, "{h}");
        let kept = entropy_cap_filter(&s, std::slice::from_ref(&spike), 1.0, &int(1)).unwrap();
        assert!(kept.is_empty());
        let kept = entropy_cap_filter(&s, &[spike], 2.0, &int(1)).unwrap();
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn degenerate_reference_cannot_filter() {
        let c = Setting::canonical();
        assert!(matches!(
            entropy_cap_filter(&c, &[], 1.0, &int(1)),
            Err(Error::DegenerateReference(1))
        ));
    }

    #[test]
    fn density_approximants_stabilize() {
        let s = Setting::standard(4);
        let psi = ModelEnvelope::from_interval(s.reference(), interval(int(0), rat(1, 2))).unwrap();
        let u = psi.potential().shift(&int(-5));
        let ctx = EnergyContext::new(psi.clone());
        let mut last = None;
        for j in [1, 2, 4, 8, 16] {
            let v = density_approximant(&s, &psi, &u, &int(j)).unwrap();
            assert!(crate::grid_convex::le_everywhere(&u, &v).unwrap());
            let d = distance(&ctx, &u, &v).unwrap();
            if let Some(prev) = &last {
                assert!(&d <= prev);
            }
            last = Some(d);
        }
        assert_eq!(last, Some(int(0)));
    }

    #[test]
    fn convergence_along_family() {
        let s = Setting::standard(4);
        let levels: Vec<SlopeInterval> =
            (1..=4).map(|k| interval(int(0), rat(1, 2) + rat(1, 1 << (k + 1)))).collect();
        let fam = ModelFamily::new(&s, &levels, &interval(int(0), rat(1, 2))).unwrap();
        let cands = generate_candidates(&s, 1, 2, 8);
        let a = projected_sequence(&fam, &cands[1]).unwrap();
        let b = projected_sequence(&fam, &cands[2]).unwrap();
        let rep = monotone_distance_convergence(&fam, &a, &b, 0.1).unwrap();
        assert!(rep.monotone && rep.pass, "{rep:?}");

        let same = vec![fam.limit().potential().clone(); fam.level_count()];
        assert!(monotone_distance_convergence(&fam, &same, &same, 0.0).is_err());
    }
}
