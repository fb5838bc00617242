//! Seeded property suites. Each trial draws fresh random data from
//! `trial_rng(seed, trial)` and records one line per property checked.

use std::thread;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::ghlimits::{gh_exact, gh_upper, Correspondence, FiniteMetricSpace};
use crate::grid_convex::{le_everywhere, model_project, rooftop, ModelEnvelope, Potential, SlopeInterval};
use crate::measures::{check_comparison_principle, check_model_mass_bound, check_rooftop_mass_bound};
use crate::metric::{chain_rho, distance, MetricContext};
use crate::rational::{format_rational as f, int, rat, Rational};
use crate::sampling::{random_below, random_potential, trial_rng, LabRng, Setting};

pub const SUITES: [&str; 6] = ["metric_axioms", "energy_identities", "measure_bounds", "contraction", "chains", "gh"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteLine {
    pub property: String,
    pub seed: u64,
    pub trial: usize,
    pub pass: bool,
    pub witness: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub seed: u64,
    pub count: usize,
    pub trials_passed: usize,
    pub checks: usize,
    pub checks_passed: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub lines: Vec<SuiteLine>,
    pub summary: SuiteSummary,
}

impl SuiteOutput {
    /// JSON lines: one per check, then `{"summary": …}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&serde_json::to_string(l).expect("serializable"));
            out.push('\n');
        }
        out.push_str(&json!({ "summary": self.summary }).to_string());
        out.push('\n');
        out
    }
}

type Check = (&'static str, bool, Value);
type TrialFn = fn(&Setting, &mut LabRng) -> Result<Vec<Check>>;

/// Runs a suite on the standard nine-node setting.
pub fn run_suite(name: &str, seed: u64, count: usize) -> Result<SuiteOutput> {
    run_suite_in(&Setting::standard(8), name, seed, count)
}

pub fn run_suite_in(setting: &Setting, name: &str, seed: u64, count: usize) -> Result<SuiteOutput> {
    let trial: TrialFn = match name {
        "metric_axioms" => metric_axioms,
        "energy_identities" => energy_identities,
        "measure_bounds" => measure_bounds,
        "contraction" => contraction,
        "chains" => chains,
        "gh" => gh,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(count.max(1));
    let results: Vec<Result<Vec<Check>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..count)
                        .step_by(workers)
                        .map(|i| (i, trial(setting, &mut trial_rng(seed, i as u64))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut all: Vec<_> = handles.into_iter().flat_map(|h| h.join().expect("worker")).collect();
        all.sort_by_key(|(i, _)| *i);
        all.into_iter().map(|(_, r)| r).collect()
    });
    let mut lines = Vec::new();
    let mut trials_passed = 0;
    for (i, checks) in results.into_iter().enumerate() {
        let checks = checks?;
        if checks.iter().all(|c| c.1) {
            trials_passed += 1;
        }
        lines.extend(checks.into_iter().map(|(property, pass, witness)| SuiteLine {
            property: property.to_string(),
            seed,
            trial: i,
            pass,
            witness,
        }));
    }
    let checks_passed = lines.iter().filter(|l| l.pass).count();
    let summary = SuiteSummary {
        suite: name.to_string(),
        seed,
        count,
        trials_passed,
        checks: lines.len(),
        checks_passed,
        pass: trials_passed == count,
    };
    Ok(SuiteOutput { lines, summary })
}

/// The whole polytope, its left half and its middle half; `[0,1]`,
/// `[0,1/2]` and `[1/4,3/4]` for the unit polytope.
pub fn contexts(polytope: &SlopeInterval) -> [SlopeInterval; 3] {
    let at = |t: Rational| &polytope.lo + polytope.length() * t;
    let q = |a: Rational, b: Rational| SlopeInterval::new(at(a), at(b)).expect("ordered");
    [q(int(0), int(1)), q(int(0), rat(1, 2)), q(rat(1, 4), rat(3, 4))]
}

fn envelope(s: &Setting, q: &SlopeInterval) -> ModelEnvelope {
    ModelEnvelope::from_interval(s.reference(), q.clone()).expect("interval inside polytope")
}

fn pair(a: &Rational, b: &Rational) -> Value {
    json!({ "lhs": f(a), "rhs": f(b) })
}

fn metric_axioms(s: &Setting, rng: &mut LabRng) -> Result<Vec<Check>> {
    let q = &contexts(s.polytope())[rng.gen_range(0..3)];
    let ctx = MetricContext::new(EnergyContext::new(envelope(s, q)))?;
    let draw = |rng: &mut LabRng| random_potential(rng, s.grid(), q, 8);
    let (u, v, w) = (draw(rng), draw(rng), draw(rng));
    let d = |a: &Potential, b: &Potential| ctx.dist(a, b);
    let (duv, dvu, dvw, duw) = (d(&u, &v)?, d(&v, &u)?, d(&v, &w)?, d(&u, &w)?);
    let p = rooftop(&u, &v)?;
    let (dup, dvp) = (d(&u, &p)?, d(&v, &p)?);
    let lower = rooftop(&u, &v)?;
    let lowest = rooftop(&lower, &w)?;
    let (d1, d2, d3) = (d(&u, &lower)?, d(&lower, &lowest)?, d(&u, &lowest)?);
    let di = ctx.double_inequality(&u, &v)?;
    Ok(vec![
        ("symmetry", duv == dvu, pair(&duv, &dvu)),
        ("identity", d(&u, &u)?.is_zero() && (duv.is_zero() == (u == v)), json!({ "d": f(&duv) })),
        ("triangle", duw <= &duv + &dvw, pair(&duw, &(&duv + &dvw))),
        ("pythagoras", duv == &dup + &dvp, pair(&duv, &(&dup + &dvp))),
        ("order_additivity", d3 == &d1 + &d2, pair(&d3, &(&d1 + &d2))),
        (
            "double_inequality",
            di.pass(),
            json!({ "constant": f(&di.constant), "integral": f(&di.integral), "d": f(&di.distance) }),
        ),
    ])
}

fn energy_identities(s: &Setting, rng: &mut LabRng) -> Result<Vec<Check>> {
    let q = &contexts(s.polytope())[rng.gen_range(0..3)];
    let ctx = EnergyContext::new(envelope(s, q));
    let u = random_potential(rng, s.grid(), q, 8);
    let v = random_potential(rng, s.grid(), q, 8);
    let below = random_below(rng, &u, 8);
    let c = rat(rng.gen_range(-8..=8), 4);
    let report = ctx.energy_diff_identity(&u, &v)?;
    let (eu, eb) = (ctx.energy(&u)?, ctx.energy(&below)?);
    let shifted = ctx.energy(&u.shift(&c))?;
    let expected = &eu + &c * ctx.mass();
    Ok(vec![
        (
            "energy_difference",
            report.identity_holds(),
            pair(&report.difference, &report.mixed_average),
        ),
        (
            "energy_sandwich",
            report.sandwich_holds(),
            json!({ "against_u": f(&report.against_u), "difference": f(&report.difference), "against_v": f(&report.against_v) }),
        ),
        ("energy_monotone", eb <= eu, pair(&eb, &eu)),
        ("energy_translation", shifted == expected, pair(&shifted, &expected)),
    ])
}

fn nested(s: &Setting, rng: &mut LabRng) -> (SlopeInterval, SlopeInterval) {
    let [full, left, mid] = contexts(s.polytope());
    match rng.gen_range(0..3) {
        0 => (full, left),
        1 => (full, mid),
        _ => (mid.clone(), mid),
    }
}

fn measure_bounds(s: &Setting, rng: &mut LabRng) -> Result<Vec<Check>> {
    let (outer, inner) = nested(s, rng);
    let u = random_potential(rng, s.grid(), &inner, 8);
    let v = random_potential(rng, s.grid(), &outer, 8).shift(&rat(rng.gen_range(-4..=4), 4));
    let w = random_potential(rng, s.grid(), &outer, 8);
    let psi = envelope(s, &inner);
    let cp = check_comparison_principle(&u, &v)?;
    let rm = check_rooftop_mass_bound(&v, &w)?;
    let mm = check_model_mass_bound(&psi, &v)?;
    let witness = |r: &crate::report::Report| serde_json::to_value(r).expect("serializable");
    Ok(vec![
        ("comparison_principle", cp.pass, witness(&cp)),
        ("rooftop_mass_bound", rm.pass, witness(&rm)),
        ("model_mass_bound", mm.pass, witness(&mm)),
    ])
}

fn contraction(s: &Setting, rng: &mut LabRng) -> Result<Vec<Check>> {
    let (outer, inner) = nested(s, rng);
    let (big, small) = (envelope(s, &outer), envelope(s, &inner));
    let u = random_potential(rng, s.grid(), &outer, 8);
    let v = random_potential(rng, s.grid(), &outer, 8);
    let (pu, pv) = (model_project(&small, &u)?, model_project(&small, &v)?);
    let before = distance(&EnergyContext::new(big), &u, &v)?;
    let after = distance(&EnergyContext::new(small.clone()), &pu, &pv)?;
    let ppu = model_project(&small, &pu)?;
    Ok(vec![
        ("lipschitz", after <= before, pair(&after, &before)),
        ("idempotent", ppu == pu, json!({})),
    ])
}

fn chains(s: &Setting, rng: &mut LabRng) -> Result<Vec<Check>> {
    let q = &contexts(s.polytope())[rng.gen_range(0..3)];
    let ctx = EnergyContext::new(envelope(s, q));
    let u = random_potential(rng, s.grid(), q, 8);
    let v = random_below(rng, &u, 8);
    let d = distance(&ctx, &u, &v)?;
    let sums: Vec<Rational> = [1u32, 2, 4, 8, 16].iter().map(|&n| chain_rho(&u, &v, n)).collect::<Result<_>>()?;
    let ordered = le_everywhere(&v, &u)?;
    Ok(vec![
        ("ordered_pair", ordered, json!({})),
        ("chain_upper_bound", sums.iter().all(|c| c >= &d), json!({ "d": f(&d), "chains": sums.iter().map(f).collect::<Vec<_>>() })),
        ("chain_monotone", sums.windows(2).all(|w| w[1] <= w[0]), json!({})),
        (
            "chain_rate",
            (&sums[4] - &d) * int(16) == &sums[0] - &d,
            json!({ "first_gap": f(&(&sums[0] - &d)), "last_gap": f(&(&sums[4] - &d)) }),
        ),
    ])
}

fn random_space(rng: &mut LabRng) -> FiniteMetricSpace {
    let n = rng.gen_range(1..=4);
    let points: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..=16), 4)).collect();
    let d = points.iter().map(|a| points.iter().map(|b| (a - b).abs()).collect()).collect();
    FiniteMetricSpace::new((0..n).map(|i| format!("x{i}")).collect(), d, 0).expect("line metric")
}

fn gh(_: &Setting, rng: &mut LabRng) -> Result<Vec<Check>> {
    let (x, y) = (random_space(rng), random_space(rng));
    let exact = gh_exact(&x, &y)?;
    let back = gh_exact(&y, &x)?;
    let mut pairs: Vec<(usize, usize)> = (0..x.len()).map(|i| (i, rng.gen_range(0..y.len()))).collect();
    pairs.extend((0..y.len()).map(|j| (rng.gen_range(0..x.len()), j)));
    let r = Correspondence::new(&x, &y, pairs)?;
    let upper = gh_upper(&x, &y, &r)?;
    Ok(vec![
        ("gh_below_upper", exact.value <= upper, pair(&exact.value, &upper)),
        ("gh_symmetric", exact.value == back.value, pair(&exact.value, &back.value)),
        ("gh_self_zero", gh_exact(&x, &x)?.value.is_zero(), json!({})),
    ])
}
