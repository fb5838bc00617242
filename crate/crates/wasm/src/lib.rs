//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string; failures come back as `{"error": "..."}`.

use femlab::energy::EnergyContext;
use femlab::families::{entropy_cap_filter, generate_candidates, ModelFamily};
use femlab::ghlimits::cpgh_experiment;
use femlab::grid_convex::{model_project, rooftop, ModelEnvelope, Potential, SlopeInterval};
use femlab::metric::{chain_rho, distance};
use femlab::rational::{format_rational, int, rat, to_f64, Rational};
use femlab::sampling::{random_below, random_potential, trial_rng, Setting};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_INTERVALS: usize = 32;

fn curve(u: &Potential) -> Value {
    json!({
        "values": u.values().iter().map(to_f64).collect::<Vec<_>>(),
        "exact": u.values().iter().map(format_rational).collect::<Vec<_>>(),
        "slopes": [format_rational(u.slope_left()), format_rational(u.slope_right())],
    })
}

fn eighths(lo: u32, hi: u32) -> femlab::Result<SlopeInterval> {
    SlopeInterval::new(rat(lo.min(8).into(), 8), rat(hi.min(8).into(), 8))
}

fn setting(intervals: usize) -> femlab::Result<Setting> {
    if !(1..=MAX_INTERVALS).contains(&intervals) {
        return Err(femlab::Error::Validation(format!("intervals must be in 1..={MAX_INTERVALS}")));
    }
    Ok(Setting::standard(intervals))
}

fn respond(r: femlab::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Two random potentials, their rooftop envelope, and the projection of the
/// first onto the model envelope with slopes in `[q_lo/8, q_hi/8]`.
pub fn envelope_view(intervals: usize, seed: u64, q_lo: u32, q_hi: u32) -> femlab::Result<Value> {
    let s = setting(intervals)?;
    let q = eighths(q_lo, q_hi)?;
    let mut rng = trial_rng(seed, 0);
    let u = random_potential(&mut rng, s.grid(), s.polytope(), 8);
    let v = random_potential(&mut rng, s.grid(), s.polytope(), 8);
    let psi = ModelEnvelope::from_interval(s.reference(), q.clone())?;
    let p = rooftop(&u, &v)?;
    let proj = model_project(&psi, &u)?;
    Ok(json!({
        "nodes": s.grid().nodes().iter().map(to_f64).collect::<Vec<_>>(),
        "u": curve(&u),
        "v": curve(&v),
        "rooftop": curve(&p),
        "psi": curve(psi.potential()),
        "projection": curve(&proj),
        "mass": format_rational(&psi.mass()),
    }))
}

/// Distance of an ordered pair and the rho-chain sums for `N = 1, 2, 4, …`.
pub fn chain_view(intervals: usize, seed: u64, doublings: u32) -> femlab::Result<Value> {
    let s = setting(intervals)?;
    let mut rng = trial_rng(seed, 1);
    let u = random_potential(&mut rng, s.grid(), s.polytope(), 8);
    let v = random_below(&mut rng, &u, 8);
    let ctx = EnergyContext::new(ModelEnvelope::from_interval(s.reference(), s.polytope().clone())?);
    let d = distance(&ctx, &u, &v)?;
    let rows = (0..=doublings.min(10))
        .map(|k| {
            let n = 1u32 << k;
            let c = chain_rho(&u, &v, n)?;
            Ok(json!({ "links": n, "chain": format_rational(&c), "gap": to_f64(&(&c - &d)) }))
        })
        .collect::<femlab::Result<Vec<_>>>()?;
    Ok(json!({
        "nodes": s.grid().nodes().iter().map(to_f64).collect::<Vec<_>>(),
        "u": curve(&u),
        "v": curve(&v),
        "distance": format_rational(&d),
        "distance_float": to_f64(&d),
        "rows": rows,
    }))
}

/// Canonical-correspondence distortions for `Q_k = [0, 1/2 + 2^-(k+1)]`.
pub fn cpgh_view(intervals: usize, seed: u64, samples: usize, levels: u32) -> femlab::Result<Value> {
    let s = setting(intervals)?;
    let levels = levels.clamp(1, 6);
    let qs: Vec<SlopeInterval> = (1..=levels)
        .map(|k| SlopeInterval::new(int(0), rat(1, 2) + Rational::new(1.into(), (1i64 << (k + 1)).into())))
        .collect::<femlab::Result<_>>()?;
    let family = ModelFamily::new(&s, &qs, &SlopeInterval::new(int(0), rat(1, 2))?)?;
    let candidates = generate_candidates(&s, seed, samples.min(24), 8);
    let sampled = entropy_cap_filter(&s, &candidates, 2.0, &int(2))?;
    let table = cpgh_experiment(&family, &sampled, &[1.0, 2.0], 0.02)?;
    Ok(json!({
        "rows": table.rows.iter().map(|r| json!({
            "cap": r.cap, "level": r.level, "points": r.points,
            "distortion": format_rational(&r.distortion), "float": to_f64(&r.distortion),
        })).collect::<Vec<_>>(),
        "monotone": table.monotone,
        "csv": table.to_csv(),
    }))
}

#[wasm_bindgen]
pub fn envelopes(intervals: usize, seed: u64, q_lo: u32, q_hi: u32) -> String {
    respond(envelope_view(intervals, seed, q_lo, q_hi))
}

#[wasm_bindgen]
pub fn chains(intervals: usize, seed: u64, doublings: u32) -> String {
    respond(chain_view(intervals, seed, doublings))
}

#[wasm_bindgen]
pub fn cpgh(intervals: usize, seed: u64, samples: usize, levels: u32) -> String {
    respond(cpgh_view(intervals, seed, samples, levels))
}
