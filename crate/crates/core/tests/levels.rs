//! Cross-level behaviour: families, the quasi-distance and chains.

mod common;

use femlab::bigspace::{BigPoint, BigSpace};
use femlab::energy::EnergyContext;
use femlab::families::{
    density_approximant, entropy_cap_filter, generate_candidates, monotone_distance_convergence,
    projected_sequence, FamilySchedule, LevelTables, ModelFamily,
};
use femlab::grid_convex::{ModelEnvelope, SlopeInterval};
use femlab::metric::distance;
use femlab::rational::{int, rat, Rational};
use femlab::sampling::Setting;
use proptest::prelude::*;

fn q(a: Rational, b: Rational) -> SlopeInterval {
    SlopeInterval::new(a, b).unwrap()
}

fn family(s: &Setting) -> ModelFamily {
    ModelFamily::new(
        s,
        &[q(int(0), int(1)), q(int(0), rat(7, 8)), q(int(0), rat(3, 4))],
        &q(int(0), rat(1, 2)),
    )
    .unwrap()
}

fn space(seed: u64) -> BigSpace {
    let s = Setting::standard(6);
    let cands = generate_candidates(&s, seed, 7, 8);
    let samples = entropy_cap_filter(&s, &cands, 3.0, &int(2)).unwrap();
    BigSpace::new(family(&s), samples).unwrap()
}

fn points(big: &BigSpace) -> Vec<BigPoint> {
    (0..big.level_count())
        .flat_map(|l| (0..big.samples().len()).map(move |m| BigPoint { level: l, member: m }))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn da_is_a_pseudometric_on_the_pool(seed in 0u64..1000) {
        let big = space(seed);
        let all = points(&big);
        let da = |a: BigPoint, b: BigPoint| big.da(a, b, &all).unwrap().value;
        for (i, &a) in all.iter().enumerate().step_by(3) {
            for &b in all[i..].iter().step_by(4) {
                let ab = da(a, b);
                prop_assert_eq!(&ab, &da(b, a));
                for &c in all.iter().step_by(5) {
                    prop_assert!(ab <= da(a, c) + da(c, b));
                }
            }
        }
    }

    #[test]
    fn larger_pools_never_increase_da(seed in 0u64..1000) {
        let big = space(seed);
        let all = points(&big);
        let (p, r) = (all[1], all[all.len() - 2]);
        let mut last = big.da(p, r, &[]).unwrap().value;
        for k in (0..=all.len()).step_by(5) {
            let v = big.da(p, r, &all[..k]).unwrap().value;
            prop_assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn projections_are_one_lipschitz_between_levels(seed in 0u64..1000) {
        let s = Setting::standard(6);
        let fam = family(&s);
        let cands = generate_candidates(&s, seed, 6, 8);
        let t = LevelTables::build(&fam, &cands).unwrap();
        for k in 0..t.distances.len() {
            for j in k..t.distances.len() {
                for a in 0..cands.len() {
                    for b in 0..cands.len() {
                        prop_assert!(t.distances[j][a][b] <= t.distances[k][a][b]);
                    }
                }
            }
        }
        let defects = t.uniform_defects(&(0..cands.len()).collect::<Vec<_>>());
        prop_assert!(defects.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(defects.last().unwrap(), &int(0));
    }

    #[test]
    fn density_approximants_decrease(seed in 0u64..1000, level in 0usize..3) {
        let s = Setting::standard(6);
        let fam = family(&s);
        let cands = generate_candidates(&s, seed, 3, 8);
        let psi = fam.level(level);
        let ctx = EnergyContext::new(psi.clone());
        for u in &cands {
            let u = femlab::model_project(psi, u).unwrap();
            let mut prev: Option<Rational> = None;
            for j in [1, 2, 3, 5, 8, 13] {
                let v = density_approximant(&s, psi, &u, &int(j)).unwrap();
                let d = distance(&ctx, &u, &v).unwrap();
                prop_assert!(prev.as_ref().is_none_or(|p| &d <= p));
                prev = Some(d);
            }
        }
    }
}

#[test]
fn convergence_in_both_directions() {
    let s = Setting::standard(6);
    let cands = generate_candidates(&s, 17, 2, 8);
    let down: Vec<SlopeInterval> = (1..=5).map(|k| q(int(0), rat(1, 2) + rat(1, 1 << (k + 1)))).collect();
    let fam = ModelFamily::new(&s, &down, &q(int(0), rat(1, 2))).unwrap();
    let a = projected_sequence(&fam, &cands[1]).unwrap();
    let b = projected_sequence(&fam, &cands[2]).unwrap();
    let rep = monotone_distance_convergence(&fam, &a, &b, 0.05).unwrap();
    assert!(rep.pass, "{rep:?}");

    let up: Vec<SlopeInterval> = (1..=5).map(|k| q(int(0), rat(1, 2) - rat(1, 1 << (k + 1)))).collect();
    let fam = ModelFamily::new(&s, &up, &q(int(0), rat(1, 2))).unwrap();
    let a = projected_sequence(&fam, &cands[1]).unwrap();
    let b = projected_sequence(&fam, &cands[2]).unwrap();
    let rep = monotone_distance_convergence(&fam, &a, &b, 0.05).unwrap();
    assert!(rep.pass, "{rep:?}");

    let psi = ModelEnvelope::from_interval(s.reference(), q(int(0), rat(1, 2))).unwrap();
    let flat = vec![psi.potential().clone(); fam.level_count()];
    let lowered: Vec<_> = flat.iter().map(|p| p.shift(&int(-1))).collect();
    let fam = ModelFamily::new(&s, &vec![psi.interval().clone(); 2], psi.interval()).unwrap();
    let rep = monotone_distance_convergence(&fam, &flat[..3], &lowered[..3], 0.0).unwrap();
    assert!(rep.distances.iter().all(|d| d == &rep.limit));
}

#[test]
fn shifted_envelope_approximant() {
    // u = psi - 5 sits below psi - 1 everywhere, so max(u, ref - 1) projects to psi - 1
    let s = Setting::standard(6);
    let psi = ModelEnvelope::from_interval(s.reference(), q(int(0), rat(1, 2))).unwrap();
    let u = psi.potential().shift(&int(-5));
    let v = density_approximant(&s, &psi, &u, &int(1)).unwrap();
    assert_eq!(v, psi.potential().shift(&int(-1)));
    let v = density_approximant(&s, &psi, &u, &int(5)).unwrap();
    assert_eq!(v, u);
}

#[test]
fn schedule_json() {
    let text = r#"{"levels": [{"Q": ["0/1", "1/1"]}, {"Q": ["0/1", "3/4"]}], "limit": {"Q": ["0/1", "1/2"]},
                   "samples": {"seed": 5, "count": 6, "caps": [1.0, 2.0]}}"#;
    let schedule: FamilySchedule = serde_json::from_str(text).unwrap();
    let s = Setting::standard(6);
    let fam = schedule.build(&s).unwrap();
    assert_eq!(fam.level_count(), 3);
    let samples = schedule.sample(&s).unwrap().unwrap();
    assert!(samples.member_caps.iter().all(|c| *c <= 2.0));
    let back: FamilySchedule = serde_json::from_str(&serde_json::to_string(&schedule).unwrap()).unwrap();
    assert_eq!(back, schedule);
}

#[test]
fn zero_mass_context_has_zero_distance() {
    let s = Setting::standard(6);
    let psi = ModelEnvelope::from_interval(s.reference(), q(rat(1, 2), rat(1, 2))).unwrap();
    let ctx = EnergyContext::new(psi.clone());
    let u = psi.potential().shift(&int(3));
    assert_eq!(distance(&ctx, psi.potential(), &u).unwrap(), int(0));
    assert!(femlab::metric::MetricContext::new(ctx).is_err());
}
