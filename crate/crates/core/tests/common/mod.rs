//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use femlab::grid_convex::{Grid, Potential, SlopeInterval};
use femlab::rational::{int, rat, Rational};
use num_traits::Zero;
use proptest::prelude::*;

pub fn grid(intervals: usize) -> Arc<Grid> {
    Arc::new(Grid::uniform(int(-2), int(2), intervals).unwrap())
}

pub fn interval(a: Rational, b: Rational) -> SlopeInterval {
    SlopeInterval::new(a, b).unwrap()
}

/// Potential with the given chord lattice indices (sorted here) on the
/// `den`-lattice of `q`.
pub fn from_indices(grid: &Arc<Grid>, q: &SlopeInterval, mut idx: Vec<u32>, den: u32, start: i64) -> Potential {
    idx.sort();
    let x = grid.nodes();
    let mut values = vec![rat(start, 4)];
    for (k, i) in idx.iter().enumerate() {
        let slope = &q.lo + q.length() * rat(*i as i64, den as i64);
        let next = &values[k] + slope * (&x[k + 1] - &x[k]);
        values.push(next);
    }
    Potential::new(grid.clone(), values, q.lo.clone(), q.hi.clone()).unwrap()
}

pub fn potential_on(grid: Arc<Grid>, q: SlopeInterval) -> impl Strategy<Value = Potential> {
    let m = grid.len() - 1;
    (prop::collection::vec(0u32..=8, m), -8i64..=8)
        .prop_map(move |(idx, start)| from_indices(&grid, &q, idx, 8, start))
}

/// `f*(p) = max_i (p x_i - f_i)`, the conjugate on the dual domain.
pub fn conj_brute(u: &Potential, p: &Rational) -> Rational {
    u.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(x, f)| p * x - f)
        .max()
        .unwrap()
}

/// Every slope between two obstacle points that lies in `[a, b]`, with the
/// endpoints: a superset of the breakpoints of the conjugate.
fn candidate_slopes(x: &[Rational], o: &[Rational], q: &SlopeInterval) -> Vec<Rational> {
    let mut s = vec![q.lo.clone(), q.hi.clone()];
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let p = (&o[j] - &o[i]) / (&x[j] - &x[i]);
            if q.contains(&p) {
                s.push(p);
            }
        }
    }
    s.sort();
    s.dedup();
    s
}

/// Node values of the greatest convex function with slopes in `q` lying
/// below the obstacle values `o` at the nodes `x`. The supporting-line
/// formula `max_p (p x - max_j (p x_j - o_j))` is concave in `p`, so the
/// maximum sits at one of the candidate slopes.
pub fn envelope_brute(x: &[Rational], o: &[Rational], q: &SlopeInterval) -> Vec<Rational> {
    let slopes = candidate_slopes(x, o, q);
    let support = |p: &Rational| x.iter().zip(o).map(|(xj, oj)| p * xj - oj).max().unwrap();
    x.iter()
        .map(|xi| slopes.iter().map(|p| p * xi - support(p)).max().unwrap())
        .collect()
}

/// `∫_q g(p) dp` for a function that is linear between consecutive
/// `breaks` (trapezoid rule, exact).
pub fn integrate_pl(breaks: &[Rational], g: impl Fn(&Rational) -> Rational) -> Rational {
    breaks
        .windows(2)
        .map(|w| (&w[1] - &w[0]) * (g(&w[0]) + g(&w[1])) / int(2))
        .fold(Rational::zero(), |a, b| a + b)
}

pub fn dual_breaks(us: &[&Potential], q: &SlopeInterval) -> Vec<Rational> {
    let mut all = vec![q.lo.clone(), q.hi.clone()];
    for u in us {
        let x = u.grid().nodes();
        all.extend(candidate_slopes(x, u.values(), q));
    }
    // crossings of two conjugates are breakpoints of their max
    for (a, u) in us.iter().enumerate() {
        for v in &us[a + 1..] {
            let x = u.grid().nodes();
            for i in 0..x.len() {
                for j in 0..x.len() {
                    if x[i] != x[j] {
                        // p x_i - u_i = p x_j - v_j
                        let p = (&u.values()[i] - &v.values()[j]) / (&x[i] - &x[j]);
                        if q.contains(&p) {
                            all.push(p);
                        }
                    }
                }
            }
        }
    }
    all.sort();
    all.dedup();
    all
}

/// `E_psi(u) = ∫_Q (psi*(p) - u*(p)) dp`.
pub fn energy_brute(psi: &Potential, u: &Potential, q: &SlopeInterval) -> Rational {
    let breaks = dual_breaks(&[psi, u], q);
    integrate_pl(&breaks, |p| conj_brute(psi, p) - conj_brute(u, p))
}

/// `d(u, v) = ∫_Q |u*(p) - v*(p)| dp`.
pub fn distance_brute(u: &Potential, v: &Potential, q: &SlopeInterval) -> Rational {
    let breaks = dual_breaks(&[u, v], q);
    // |u* - v*| is linear between breaks because crossings are included
    integrate_pl(&breaks, |p| {
        let d = conj_brute(u, p) - conj_brute(v, p);
        if d < Rational::zero() {
            -d
        } else {
            d
        }
    })
}
