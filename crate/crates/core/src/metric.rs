//! The distance `d(u, v) = E(u) + E(v) - 2 E(P(u, v))` on the sector of a
//! model envelope, plus the rho-chain bound, the Darboux-sum limit, the
//! sup-bound estimator and the Cauchy envelope construction.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::grid_convex::{align, le_everywhere, rooftop, rooftop_all, sup_diff, Potential, SupDiff};
use crate::measures::{integrate_diff, ma};
use crate::rational::{int, serde_rat, Rational};

/// `1 / (3 * 2^(n+2) * (n+1))`, the lower constant of the double inequality.
pub fn double_inequality_constant(n: u32) -> Rational {
    let den = BigInt::from(3) * (BigInt::one() << (n + 2)) * BigInt::from(n + 1);
    Rational::new(BigInt::one(), den)
}

/// Distance on the sector of `ctx`. Works for zero-mass contexts too, where
/// it vanishes identically.
pub fn distance(ctx: &EnergyContext, u: &Potential, v: &Potential) -> Result<Rational> {
    ctx.check_sector(u)?;
    ctx.check_sector(v)?;
    let (u, v) = align(u, v)?;
    let p = rooftop(&u, &v)?;
    Ok(ctx.energy(&u)? + ctx.energy(&v)? - int(2) * ctx.energy(&p)?)
}

/// `rho(u, v) = ∫(u - v) dMA(v)` for `u >= v`, symmetric otherwise.
pub fn rho(u: &Potential, v: &Potential) -> Result<Rational> {
    let (u, v) = align(u, v)?;
    if le_everywhere(&v, &u)? {
        integrate_diff(&u, &v, &ma(&v))
    } else if le_everywhere(&u, &v)? {
        integrate_diff(&v, &u, &ma(&u))
    } else {
        Err(Error::NotComparable)
    }
}

/// Sum of `rho` along the affine chain `w_j = (j/N) u + ((N-j)/N) v`.
pub fn chain_rho(u: &Potential, v: &Potential, links: u32) -> Result<Rational> {
    if links == 0 {
        return Err(Error::PreconditionViolated("a chain needs at least one link".into()));
    }
    let (u, v) = align(u, v)?;
    if !(le_everywhere(&v, &u)? || le_everywhere(&u, &v)?) {
        return Err(Error::NotComparable);
    }
    let n = Rational::from_integer(links.into());
    let chain: Vec<Potential> = (0..=links)
        .map(|j| v.lerp(&u, &(Rational::from_integer(j.into()) / &n)))
        .collect::<Result<_>>()?;
    chain.windows(2).map(|w| rho(&w[0], &w[1])).sum()
}

/// `(1/N) Σ_{j=0}^{N-1} (j/N)^s ((N-j)/N)^(n-s)`.
pub fn darboux_sum(n: u32, s: u32, links: u32) -> Result<Rational> {
    if n == 0 || s > n {
        return Err(Error::BadExponent(s as i64));
    }
    if links == 0 {
        return Err(Error::PreconditionViolated("N must be positive".into()));
    }
    let big_n = Rational::from_integer(links.into());
    let total: Rational = (0..links)
        .map(|j| {
            let t = Rational::from_integer(j.into()) / &big_n;
            let r = Rational::one() - &t;
            num_traits::pow(t, s as usize) * num_traits::pow(r, (n - s) as usize)
        })
        .sum();
    Ok(total / big_n)
}

/// `1 / (C(n, s) (n + 1))`, the integral of `t^s (1-t)^(n-s)` over `[0, 1]`.
pub fn darboux_limit(n: u32, s: u32) -> Result<Rational> {
    if n == 0 || s > n {
        return Err(Error::BadExponent(s as i64));
    }
    let binom = num_integer::binomial(BigInt::from(n), BigInt::from(s));
    Ok(Rational::new(BigInt::one(), binom * BigInt::from(n + 1)))
}

/// A metric context: an energy context with positive mass.
#[derive(Clone, Debug)]
pub struct MetricContext {
    energy: EnergyContext,
}

impl MetricContext {
    pub fn new(energy: EnergyContext) -> Result<Self> {
        if energy.is_degenerate() {
            return Err(Error::ZeroMass);
        }
        Ok(MetricContext { energy })
    }

    pub fn energy_context(&self) -> &EnergyContext {
        &self.energy
    }

    pub fn lower_constant(&self) -> Rational {
        double_inequality_constant(1)
    }

    pub fn dist(&self, u: &Potential, v: &Potential) -> Result<Rational> {
        distance(&self.energy, u, v)
    }

    pub fn double_inequality(&self, u: &Potential, v: &Potential) -> Result<DoubleInequality> {
        let distance = self.dist(u, v)?;
        let (u, v) = align(u, v)?;
        let (mu, mv) = (ma(&u), ma(&v));
        let integral = u
            .values()
            .iter()
            .zip(v.values())
            .enumerate()
            .map(|(i, (a, b))| (a - b).abs() * (&mu.masses()[i] + &mv.masses()[i]))
            .sum();
        Ok(DoubleInequality { constant: self.lower_constant(), integral, distance })
    }

    /// Empirical constants for `-d(psi,u) <= V sup(u - psi) <= A d(psi,u) + B`.
    ///
    /// `a` is the smallest `A >= 1` for which the right inequality holds on
    /// the family with `B = 0`; `b_at_unit_a` is the smallest `B` that works
    /// with `A = 1`. These are sample estimates, not the existential
    /// constants of the compactness argument.
    pub fn estimate_sup_bound_constants(&self, family: &[Potential]) -> Result<SupBound> {
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let psi = self.energy.psi().potential();
        let v = self.energy.mass();
        let mut rows = Vec::with_capacity(family.len());
        for u in family {
            let d = self.dist(psi, u)?;
            let s = match sup_diff(u, psi)? {
                SupDiff::Finite(s) => &v * s,
                SupDiff::PlusInfinity => return Err(Error::SingularityMismatch),
            };
            rows.push((s, d));
        }
        let left_pass = rows.iter().all(|(s, d)| -d <= *s);
        let mut a = Rational::one();
        let mut binding = 0;
        for (i, (s, d)) in rows.iter().enumerate() {
            if d.is_positive() && (s / d) > a {
                a = s / d;
                binding = i;
            }
        }
        let slack = |a: &Rational| {
            rows.iter()
                .map(|(s, d)| s - a * d)
                .fold(Rational::zero(), |acc, x| acc.max(x))
        };
        let b = slack(&a);
        let b_at_unit_a = slack(&Rational::one());
        Ok(SupBound { a, b, b_at_unit_a, binding, left_pass })
    }

    /// Sequence with `d(u_j, u_{j+1}) <= 2^-j`: `u_0 = targets[0]` and
    /// `u_{j+1} = u_j + t (targets[j+1] - u_j)` with `t` the largest power of
    /// `1/2` meeting the bound. All targets must share a grid and the sector.
    pub fn cauchy_sequence(&self, targets: &[Potential]) -> Result<Vec<Potential>> {
        let Some(first) = targets.first() else { return Ok(Vec::new()) };
        let mut seq = vec![first.clone()];
        for (j, w) in targets[1..].iter().enumerate() {
            let bound = Rational::new(BigInt::one(), BigInt::one() << j);
            let last = seq.last().expect("nonempty");
            let mut t = Rational::one();
            let next = loop {
                let cand = last.lerp(w, &t)?;
                if self.dist(last, &cand)? <= bound {
                    break cand;
                }
                t /= int(2);
            };
            seq.push(next);
        }
        Ok(seq)
    }

    /// Envelope iterates `v_{j,k} = P(u_j, ..., u_{j+k})` of a sequence with
    /// `d(u_j, u_{j+1}) <= 2^-j`, checked against `d(u_j, v_{j,k}) <= 2^(1-j)`.
    pub fn cauchy_envelopes(&self, seq: &[Potential], max_k: usize) -> Result<Vec<CauchyRow>> {
        let mut rows = Vec::new();
        for j in 0..seq.len() {
            let bound = Rational::new(BigInt::from(2), BigInt::one() << j);
            for k in 0..=max_k.min(seq.len() - 1 - j) {
                let env = rooftop_all(seq[j..=j + k].iter())?;
                let distance = self.dist(&seq[j], &env)?;
                rows.push(CauchyRow { j, k, pass: distance <= bound, distance, bound: bound.clone() });
            }
        }
        Ok(rows)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DoubleInequality {
    #[serde(with = "serde_rat")]
    pub constant: Rational,
    /// `∫|u - v| (dMA(u) + dMA(v))`.
    #[serde(with = "serde_rat")]
    pub integral: Rational,
    #[serde(with = "serde_rat")]
    pub distance: Rational,
}

impl DoubleInequality {
    pub fn pass(&self) -> bool {
        &self.constant * &self.integral <= self.distance && self.distance <= self.integral
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupBound {
    #[serde(with = "serde_rat")]
    pub a: Rational,
    #[serde(with = "serde_rat")]
    pub b: Rational,
    #[serde(with = "serde_rat")]
    pub b_at_unit_a: Rational,
    /// Family index that fixed `a`.
    pub binding: usize,
    pub left_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CauchyRow {
    pub j: usize,
    pub k: usize,
    #[serde(with = "serde_rat")]
    pub distance: Rational,
    #[serde(with = "serde_rat")]
    pub bound: Rational,
    pub pass: bool,
}
