//! Invariants over random potentials.

mod common;

use common::*;
use femlab::energy::EnergyContext;
use femlab::grid_convex::{
    biconjugate, le_everywhere, model_project, rooftop, sup_diff, ModelEnvelope, Potential,
};
use femlab::measures::{entropy, ma};
use femlab::metric::{chain_rho, distance, rho};
use femlab::rational::{int, rat, Rational};
use femlab::sampling::Setting;
use femlab::SlopeInterval;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn setting() -> Setting {
    Setting::standard(6)
}

fn full() -> SlopeInterval {
    interval(int(0), int(1))
}

fn nested() -> impl Strategy<Value = (SlopeInterval, SlopeInterval)> {
    (0i64..=2, 6i64..=8, 0i64..=2, 0i64..=1).prop_map(|(a, b, da, db)| {
        (interval(rat(a, 8), rat(b, 8)), interval(rat(a + da, 8), rat(b - db, 8)))
    })
}

fn pot(q: SlopeInterval) -> impl Strategy<Value = Potential> {
    potential_on(grid(6), q)
}

fn sup_norm(u: &Potential, v: &Potential) -> Rational {
    u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).max().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn biconjugation_is_identity(u in pot(full())) {
        prop_assert_eq!(biconjugate(&u).unwrap(), u);
    }

    #[test]
    fn rooftop_lattice_laws(u in pot(full()), v in pot(full()), w in pot(full())) {
        let p = rooftop(&u, &v).unwrap();
        prop_assert_eq!(&p, &rooftop(&v, &u).unwrap());
        prop_assert_eq!(rooftop(&u, &u).unwrap(), u.clone());
        prop_assert!(le_everywhere(&p, &u).unwrap() && le_everywhere(&p, &v).unwrap());
        prop_assert_eq!(rooftop(&p, &w).unwrap(), rooftop(&u, &rooftop(&v, &w).unwrap()).unwrap());
        // monotone in each argument
        let lifted = u.shift(&rat(1, 4));
        prop_assert!(le_everywhere(&p, &rooftop(&lifted, &v).unwrap()).unwrap());
    }

    #[test]
    fn projections_compose_and_contract((outer, inner) in nested(), u in pot(full()), v in pot(full())) {
        let s = setting();
        let big = ModelEnvelope::from_interval(s.reference(), outer).unwrap();
        let small = ModelEnvelope::from_interval(s.reference(), inner).unwrap();
        let pu = model_project(&small, &u).unwrap();
        prop_assert_eq!(model_project(&small, &model_project(&big, &u).unwrap()).unwrap(), pu.clone());
        prop_assert_eq!(model_project(&small, &pu).unwrap(), pu.clone());
        prop_assert!(le_everywhere(&pu, &u).unwrap());
        let pv = model_project(&small, &v).unwrap();
        prop_assert!(sup_norm(&pu, &pv) <= sup_norm(&u, &v));
    }

    #[test]
    fn full_mass_iff_full_domain(q in nested().prop_map(|p| p.1), u in pot(full())) {
        let s = setting();
        let psi = ModelEnvelope::from_interval(s.reference(), q.clone()).unwrap();
        let p = model_project(&psi, &u).unwrap();
        prop_assert_eq!(ma(&p).total(), psi.mass());
        prop_assert_eq!(ma(&u).total(), int(1));
        prop_assert_eq!(p.dual_domain() == full(), q == full());
    }

    #[test]
    fn energy_monotone_and_concave(
        (_, q) in nested(),
        a in prop::collection::vec(0u32..=8, 6),
        b in prop::collection::vec(0u32..=8, 6),
        t in 0i64..=4,
    ) {
        let s = setting();
        let ctx = EnergyContext::new(ModelEnvelope::from_interval(s.reference(), q.clone()).unwrap());
        let u = from_indices(s.grid(), &q, a, 8, 0);
        let v = from_indices(s.grid(), &q, b, 8, -2);
        let p = rooftop(&u, &v).unwrap();
        let (eu, ev) = (ctx.energy(&u).unwrap(), ctx.energy(&v).unwrap());
        prop_assert!(ctx.energy(&p).unwrap() <= eu.clone().min(ev.clone()));
        let t = rat(t, 4);
        let mid = v.lerp(&u, &t).unwrap();
        prop_assert!(ctx.energy(&mid).unwrap() >= &t * &eu + (int(1) - &t) * &ev);
    }

    #[test]
    fn metric_laws(
        (_, q) in nested(),
        a in prop::collection::vec(0u32..=8, 6),
        b in prop::collection::vec(0u32..=8, 6),
        c in prop::collection::vec(0u32..=8, 6),
    ) {
        let s = setting();
        let ctx = EnergyContext::new(ModelEnvelope::from_interval(s.reference(), q.clone()).unwrap());
        let u = from_indices(s.grid(), &q, a, 8, 1);
        let v = from_indices(s.grid(), &q, b, 8, 0);
        let w = from_indices(s.grid(), &q, c, 8, -1);
        let d = |x: &Potential, y: &Potential| distance(&ctx, x, y).unwrap();
        prop_assert_eq!(d(&u, &v), d(&v, &u));
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w));
        let p = rooftop(&u, &v).unwrap();
        prop_assert_eq!(d(&u, &v), d(&u, &p) + d(&p, &v));
        prop_assert_eq!(d(&u, &v).is_zero(), u == v);
        // d is translation invariant along constants
        prop_assert_eq!(d(&u.shift(&int(1)), &v.shift(&int(1))), d(&u, &v));
    }

    #[test]
    fn rho_chains_bound_distance(u in pot(full()), n in 1u32..=12) {
        let s = setting();
        let ctx = EnergyContext::new(ModelEnvelope::from_interval(s.reference(), full()).unwrap());
        let v = rooftop(&u, &s.reference().refine(u.grid()).unwrap().shift(&int(-1))).unwrap();
        let d = distance(&ctx, &u, &v).unwrap();
        let r = rho(&u, &v).unwrap();
        prop_assert!(r >= d);
        let c = chain_rho(&u, &v, n).unwrap();
        prop_assert!(c >= d);
        prop_assert_eq!((c - &d) * int(n as i64), r - d);
    }

    #[test]
    fn refinement_is_invisible(u in pot(full()), v in pot(full())) {
        let s = setting();
        let ctx = EnergyContext::new(ModelEnvelope::from_interval(s.reference(), full()).unwrap());
        let fine = std::sync::Arc::new(u.grid().with_extra([rat(1, 3), rat(-5, 4)]).unwrap());
        let (uf, vf) = (u.refine(&fine).unwrap(), v.refine(&fine).unwrap());
        prop_assert_eq!(distance(&ctx, &uf, &vf).unwrap(), distance(&ctx, &u, &v).unwrap());
        prop_assert_eq!(ctx.energy(&uf).unwrap(), ctx.energy(&u).unwrap());
    }

    #[test]
    fn sup_diff_is_attained_on_nodes(u in pot(full()), v in pot(full())) {
        let s = sup_diff(&u, &v).unwrap().finite().unwrap();
        let best = u.values().iter().zip(v.values()).map(|(a, b)| a - b).max().unwrap();
        prop_assert_eq!(s, best);
    }

    #[test]
    fn entropy_is_nonnegative_and_vanishes_on_the_diagonal(u in pot(full())) {
        let s = setting();
        let mu = ma(s.reference()).normalized().unwrap();
        let nu = ma(&u).normalized().unwrap();
        prop_assert!(entropy(&nu, &mu).unwrap().value >= 0.0);
        prop_assert_eq!(entropy(&mu, &mu).unwrap().value, 0.0);
    }

    #[test]
    fn json_round_trip(u in pot(full())) {
        let text = serde_json::to_string(&u).unwrap();
        let back: Potential = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, u);
    }
}
