//! JSON scenarios: a setting, named potentials, model families and a list
//! of experiment blocks, executed in order into a set of output files.
//!
//! ```json
//! {
//!   "setting": {"standard": 8},
//!   "potentials": {"a": {"values": ["0", "1/2", …], "slopes": ["0", "1"]}},
//!   "families": {"f": {"levels": [{"Q": ["0", "1"]}], "limit": {"Q": ["0", "1/2"]},
//!                      "samples": {"seed": 1, "count": 8, "caps": [1, 2]}}},
//!   "experiments": [
//!     {"kind": "suite", "name": "metric_axioms", "seed": 7, "count": 20},
//!     {"kind": "converge", "family": "f", "potentials": ["a", "reference"], "tolerance": 0.05},
//!     {"kind": "chain", "potentials": ["a", "reference"], "links": [1, 2, 4]},
//!     {"kind": "chain", "family": "f", "points": [[0, 1], [1, 2]], "node_pool": "all"},
//!     {"kind": "gh", "family": "f", "tolerance": 0.02, "direct_limit": true}
//!   ]
//! }
//! ```
//!
//! Rationals are written `"p/q"` or `"p"`; integers are accepted too. The
//! name `reference` always denotes the reference potential.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bigspace::{BigPoint, BigSpace};
use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::families::{monotone_distance_convergence, projected_sequence, FamilySchedule, ModelFamily, SampledFamily};
use crate::ghlimits::{cpgh_from_tables, direct_limit_check};
use crate::grid_convex::{le_everywhere, Grid, ModelEnvelope, Potential, SlopeInterval};
use crate::metric::{chain_rho, distance};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};
use crate::sampling::Setting;
use crate::suites::run_suite_in;

type BlockRun = (&'static str, bool, Vec<(String, String)>, Value);

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RatIn {
    Text(String),
    Int(i64),
}

impl RatIn {
    fn value(&self, at: &str) -> Result<Rational> {
        match self {
            RatIn::Int(n) => Ok(Rational::from_integer((*n).into())),
            RatIn::Text(s) => {
                parse_rational(s).ok_or_else(|| Error::Validation(format!("{at}: {s:?} is not a rational")))
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub setting: Option<SettingSpec>,
    #[serde(default)]
    pub potentials: BTreeMap<String, PotentialSpec>,
    #[serde(default)]
    pub families: BTreeMap<String, FamilySchedule>,
    #[serde(default)]
    pub experiments: Vec<ExperimentSpec>,
}

/// Either `{"standard": m}` or an explicit grid and reference.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingSpec {
    #[serde(default)]
    pub standard: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub reference: Option<PotentialSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nodes: Vec<RatIn>,
    pub polytope: (RatIn, RatIn),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub values: Vec<RatIn>,
    pub slopes: (RatIn, RatIn),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExperimentSpec {
    Suite {
        name: String,
        seed: u64,
        count: usize,
    },
    Converge {
        family: String,
        potentials: (String, String),
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// rho-chains between two named potentials, or `d_A` queries on a
    /// sampled family when `family` is given.
    Chain {
        #[serde(default)]
        potentials: Option<(String, String)>,
        #[serde(default)]
        context: Option<(RatIn, RatIn)>,
        #[serde(default)]
        links: Option<Vec<u32>>,
        #[serde(default)]
        expect_distance: Option<RatIn>,
        #[serde(default)]
        family: Option<String>,
        #[serde(default)]
        points: Option<Vec<(usize, usize)>>,
        #[serde(default)]
        node_pool: Option<NodePool>,
    },
    Gh {
        family: String,
        #[serde(default)]
        tolerance: Option<f64>,
        #[serde(default)]
        direct_limit: bool,
        #[serde(default)]
        steps: Option<Vec<RatIn>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NodePool {
    Named(String),
    Points(Vec<(usize, usize)>),
}

const DEFAULT_CONVERGE_TOLERANCE: f64 = 0.05;
const DEFAULT_GH_TOLERANCE: f64 = 0.02;

/// A validated scenario.
pub struct Scenario {
    setting: Option<Setting>,
    potentials: BTreeMap<String, Potential>,
    families: BTreeMap<String, (ModelFamily, Option<SampledFamily>, FamilySchedule)>,
    experiments: Vec<ExperimentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockResult {
    pub index: usize,
    pub kind: String,
    pub pass: bool,
    pub outputs: Vec<String>,
    pub witness: Value,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    /// File name and contents, in block order.
    pub files: Vec<(String, String)>,
    pub blocks: Vec<BlockResult>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.blocks.iter().all(|b| b.pass)
    }

    pub fn ensure_pass(&self) -> Result<()> {
        match self.blocks.iter().find(|b| !b.pass) {
            None => Ok(()),
            Some(b) => Err(Error::AssertionFailed(
                json!({ "block": b.index, "kind": b.kind, "witness": b.witness }).to_string(),
            )),
        }
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        if self.files.is_empty() {
            return Ok(());
        }
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn potential_from(grid: &Arc<Grid>, spec: &PotentialSpec, name: &str) -> Result<Potential> {
    let values = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v.value(&format!("{name}.values[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let lo = spec.slopes.0.value(&format!("{name}.slopes[0]"))?;
    let hi = spec.slopes.1.value(&format!("{name}.slopes[1]"))?;
    Potential::new(grid.clone(), values, lo, hi).map_err(|e| Error::Validation(format!("potential {name}: {e}")))
}

fn setting_from(spec: &SettingSpec) -> Result<Setting> {
    match (spec.standard, &spec.grid, &spec.reference) {
        (Some(m), None, None) if (1..=32).contains(&m) => Ok(Setting::standard(m)),
        (Some(m), None, None) => Err(Error::Validation(format!("standard setting needs 1..=32 intervals, got {m}"))),
        (None, Some(g), Some(r)) => {
            let nodes = g
                .nodes
                .iter()
                .enumerate()
                .map(|(i, v)| v.value(&format!("grid.nodes[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let polytope = SlopeInterval::new(g.polytope.0.value("grid.polytope")?, g.polytope.1.value("grid.polytope")?)
                .map_err(|e| Error::Validation(e.to_string()))?;
            let grid = Arc::new(Grid::new(nodes, polytope).map_err(|e| Error::Validation(e.to_string()))?);
            Setting::allowing_flat(potential_from(&grid, r, "reference")?)
        }
        _ => Err(Error::Validation("setting needs either `standard` or both `grid` and `reference`".into())),
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        Scenario::from_spec(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_spec(spec: ScenarioSpec) -> Result<Self> {
        let setting = spec.setting.as_ref().map(setting_from).transpose()?;
        let needs_setting = !spec.potentials.is_empty()
            || !spec.families.is_empty()
            || spec.experiments.iter().any(|e| !matches!(e, ExperimentSpec::Suite { .. }));
        if needs_setting && setting.is_none() {
            return Err(Error::Validation("scenario needs a setting".into()));
        }
        let mut potentials = BTreeMap::new();
        let mut families = BTreeMap::new();
        if let Some(s) = &setting {
            potentials.insert("reference".to_string(), s.reference().clone());
            for (name, p) in &spec.potentials {
                if name == "reference" {
                    return Err(Error::Validation("the name `reference` is reserved".into()));
                }
                potentials.insert(name.clone(), potential_from(s.grid(), p, name)?);
            }
            for (name, schedule) in &spec.families {
                let family = schedule.build(s).map_err(|e| Error::Validation(format!("family {name}: {e}")))?;
                let samples = schedule.sample(s).map_err(|e| Error::Validation(format!("family {name}: {e}")))?;
                families.insert(name.clone(), (family, samples, schedule.clone()));
            }
        }
        let scenario = Scenario { setting, potentials, families, experiments: spec.experiments };
        scenario.check_names()?;
        Ok(scenario)
    }

    fn check_names(&self) -> Result<()> {
        for (i, e) in self.experiments.iter().enumerate() {
            let fam = |name: &str, sampled: bool| -> Result<()> {
                match self.families.get(name) {
                    None => Err(Error::Validation(format!("experiment {i}: unknown family {name:?}"))),
                    Some((_, None, _)) if sampled => {
                        Err(Error::Validation(format!("experiment {i}: family {name:?} has no samples")))
                    }
                    _ => Ok(()),
                }
            };
            let pot = |name: &str| -> Result<()> {
                if self.potentials.contains_key(name) {
                    Ok(())
                } else {
                    Err(Error::Validation(format!("experiment {i}: unknown potential {name:?}")))
                }
            };
            match e {
                ExperimentSpec::Suite { name, .. } => {
                    if !crate::suites::SUITES.contains(&name.as_str()) {
                        return Err(Error::UnknownSuite(name.clone()));
                    }
                }
                ExperimentSpec::Converge { family, potentials, .. } => {
                    fam(family, false)?;
                    pot(&potentials.0)?;
                    pot(&potentials.1)?;
                }
                ExperimentSpec::Chain { potentials, family, points, .. } => match (potentials, family) {
                    (Some((a, b)), None) => {
                        pot(a)?;
                        pot(b)?;
                    }
                    (None, Some(f)) => {
                        fam(f, true)?;
                        if points.as_ref().is_none_or(|p| p.len() < 2) {
                            return Err(Error::Validation(format!("experiment {i}: need at least two points")));
                        }
                    }
                    _ => {
                        return Err(Error::Validation(format!(
                            "experiment {i}: chain needs either `potentials` or `family`"
                        )))
                    }
                },
                ExperimentSpec::Gh { family, .. } => fam(family, true)?,
            }
        }
        Ok(())
    }

    /// Runs every block in order. `tolerance` overrides the float thresholds
    /// of convergence and cp-GH blocks; exact assertions ignore it.
    pub fn run(&self, tolerance: Option<f64>) -> Result<RunOutcome> {
        let mut out = RunOutcome::default();
        for (index, e) in self.experiments.iter().enumerate() {
            let (kind, pass, files, witness) = self.run_block(index, e, tolerance)?;
            out.blocks.push(BlockResult {
                index,
                kind: kind.to_string(),
                pass,
                outputs: files.iter().map(|f| f.0.clone()).collect(),
                witness,
            });
            out.files.extend(files);
        }
        if !out.blocks.is_empty() {
            let summary = json!({ "pass": out.passed(), "blocks": out.blocks });
            out.files.push(("summary.json".into(), pretty(&summary)));
        }
        Ok(out)
    }

    fn setting(&self) -> &Setting {
        self.setting.as_ref().expect("validated")
    }

    fn run_block(
        &self,
        index: usize,
        e: &ExperimentSpec,
        tolerance: Option<f64>,
    ) -> Result<BlockRun> {
        match e {
            ExperimentSpec::Suite { name, seed, count } => {
                let setting = self.setting.clone().unwrap_or_else(|| Setting::standard(8));
                let res = run_suite_in(&setting, name, *seed, *count)?;
                let witness = res.lines.iter().find(|l| !l.pass).map_or(Value::Null, |l| json!(l));
                let file = (format!("{index:02}_suite_{name}.jsonl"), res.to_json_lines());
                Ok(("suite", res.summary.pass, vec![file], witness))
            }
            ExperimentSpec::Converge { family, potentials, tolerance: own } => {
                let (fam, _, _) = &self.families[family];
                let tol = tolerance.or(*own).unwrap_or(DEFAULT_CONVERGE_TOLERANCE);
                let a = projected_sequence(fam, &self.potentials[&potentials.0])?;
                let b = projected_sequence(fam, &self.potentials[&potentials.1])?;
                let rep = monotone_distance_convergence(fam, &a, &b, tol)?;
                let witness = json!({ "monotone": rep.monotone, "defects": rep_defects(&rep.defects) });
                let file = (format!("{index:02}_converge_{family}.json"), pretty(&json!(rep)));
                Ok(("converge", rep.pass, vec![file], witness))
            }
            ExperimentSpec::Chain { potentials: Some((a, b)), context, links, expect_distance, .. } => {
                self.rho_chain(index, a, b, context, links, expect_distance)
            }
            ExperimentSpec::Chain { family: Some(f), points, node_pool, .. } => {
                self.da_chain(index, f, points.as_deref().unwrap_or(&[]), node_pool.as_ref())
            }
            ExperimentSpec::Chain { .. } => unreachable!("validated"),
            ExperimentSpec::Gh { family, tolerance: own, direct_limit, steps } => {
                let (fam, samples, schedule) = &self.families[family];
                let samples = samples.as_ref().expect("validated");
                let tol = tolerance.or(*own).unwrap_or(DEFAULT_GH_TOLERANCE);
                let caps = schedule.samples.as_ref().map(|s| s.caps.clone()).unwrap_or_default();
                let tables = crate::families::LevelTables::build(fam, &samples.members)?;
                let table = cpgh_from_tables(fam, samples, &tables, &caps, tol)?;
                let mut files = vec![(format!("{index:02}_gh_{family}.csv"), table.to_csv())];
                let mut pass = table.pass;
                let mut witness = json!({ "monotone": table.monotone, "final_below_tolerance": table.final_below_tolerance });
                if *direct_limit {
                    let steps = match steps {
                        Some(s) => s.iter().map(|r| r.value("steps")).collect::<Result<Vec<_>>>()?,
                        None => (0..6).map(|k| Rational::from_integer((1i64 << k).into())).collect(),
                    };
                    let rep = direct_limit_check(fam, &samples.members, &steps, tol)?;
                    pass &= rep.pass;
                    witness["direct_limit"] = json!(rep.witness);
                    files.push((format!("{index:02}_gh_{family}_direct_limit.json"), pretty(&json!(rep))));
                }
                Ok(("gh", pass, files, witness))
            }
        }
    }

    fn rho_chain(
        &self,
        index: usize,
        a: &str,
        b: &str,
        context: &Option<(RatIn, RatIn)>,
        links: &Option<Vec<u32>>,
        expect: &Option<RatIn>,
    ) -> Result<BlockRun> {
        let s = self.setting();
        let (u, v) = (&self.potentials[a], &self.potentials[b]);
        let q = match context {
            Some((lo, hi)) => SlopeInterval::new(lo.value("context")?, hi.value("context")?)
                .map_err(|e| Error::Validation(e.to_string()))?,
            None => u.dual_domain(),
        };
        let psi = ModelEnvelope::from_interval(s.reference(), q).map_err(|e| Error::Validation(e.to_string()))?;
        let ctx = EnergyContext::new(psi);
        let d = distance(&ctx, u, v).map_err(|e| Error::Validation(format!("chain {a}, {b}: {e}")))?;
        if !(le_everywhere(u, v)? || le_everywhere(v, u)?) {
            return Ok(("chain", false, vec![], json!({ "error": "potentials are not ordered" })));
        }
        let links = links.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32, 64]);
        let mut csv = String::from("links,chain_num,chain_den,gap_num,gap_den,float\n");
        let mut pass = true;
        let mut witness = Value::Null;
        for &n in &links {
            let c = chain_rho(u, v, n)?;
            let gap = &c - &d;
            if gap.is_negative() {
                pass = false;
                witness = json!({ "links": n, "chain": format_rational(&c), "d": format_rational(&d) });
            }
            csv.push_str(&format!("{n},{},{},{},{},{}\n", c.numer(), c.denom(), gap.numer(), gap.denom(), to_f64(&c)));
        }
        if let Some(e) = expect {
            let want = e.value("expect_distance")?;
            if want != d {
                pass = false;
                witness = json!({ "expected": format_rational(&want), "d": format_rational(&d) });
            }
        }
        Ok(("chain", pass, vec![(format!("{index:02}_chain.csv"), csv)], witness))
    }

    fn da_chain(
        &self,
        index: usize,
        family: &str,
        points: &[(usize, usize)],
        pool: Option<&NodePool>,
    ) -> Result<BlockRun> {
        let (fam, samples, _) = &self.families[family];
        let big = BigSpace::new(fam.clone(), samples.clone().expect("validated"))?;
        let to_point = |&(l, m): &(usize, usize)| big.point(l, m).map_err(|e| Error::Validation(e.to_string()));
        let pts = points.iter().map(to_point).collect::<Result<Vec<BigPoint>>>()?;
        let nodes: Vec<BigPoint> = match pool {
            None => Vec::new(),
            Some(NodePool::Named(s)) if s == "all" => (0..big.level_count())
                .flat_map(|l| (0..big.samples().len()).map(move |m| BigPoint { level: l, member: m }))
                .collect(),
            Some(NodePool::Named(s)) => return Err(Error::Validation(format!("unknown node pool {s:?}"))),
            Some(NodePool::Points(p)) => p.iter().map(to_point).collect::<Result<_>>()?,
        };
        let mut results = Vec::new();
        let mut pass = true;
        let mut witness = Value::Null;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (p, q) = (pts[i], pts[j]);
                let r = big.da(p, q, &nodes)?;
                let floor = (big.mass(p) - big.mass(q)).abs();
                let mut ok = r.value >= floor;
                if p.level == q.level {
                    ok &= r.value == big.level_distance(p, q)?;
                }
                if !ok && pass {
                    pass = false;
                    witness = json!({ "p": p, "q": q, "value": format_rational(&r.value) });
                }
                results.push(json!({ "p": p, "q": q, "value": format_rational(&r.value),
                    "lower_bound_terms": r.lower_bound_terms, "chain": r.chain }));
            }
        }
        let file = (format!("{index:02}_chain_{family}.json"), pretty(&json!({ "queries": results })));
        Ok(("chain", pass, vec![file], witness))
    }
}

fn rep_defects(d: &[Rational]) -> Vec<String> {
    d.iter().map(format_rational).collect()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
