//! The relative energy `E_psi` on the minimal-singularity sector of a model
//! envelope.
//!
//! With one complex dimension the energy is
//! `E_psi(u) = (1/2) [∫(u - psi) dMA(u) + ∫(u - psi) dMA(psi)]`,
//! which is exact on piecewise-linear data because both measures are atomic
//! at nodes.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_convex::{
    compare_singularity, pointwise_max, ModelEnvelope, Potential, Singularity,
};
use crate::measures::{integrate_diff, ma, AtomicMeasure};
use crate::rational::{half, serde_rat, Rational};

#[derive(Clone, Debug)]
pub struct EnergyContext {
    psi: ModelEnvelope,
    psi_ma: AtomicMeasure,
}

impl EnergyContext {
    pub fn new(psi: ModelEnvelope) -> Self {
        let psi_ma = ma(psi.potential());
        EnergyContext { psi, psi_ma }
    }

    pub fn psi(&self) -> &ModelEnvelope {
        &self.psi
    }

    pub fn psi_measure(&self) -> &AtomicMeasure {
        &self.psi_ma
    }

    pub fn mass(&self) -> Rational {
        self.psi.mass()
    }

    /// Zero-mass contexts are allowed here but carry no metric information.
    pub fn is_degenerate(&self) -> bool {
        !self.psi.has_positive_mass()
    }

    /// `u` has the same singularity type as `psi`.
    pub fn in_sector(&self, u: &Potential) -> bool {
        u.dual_domain() == *self.psi.interval()
    }

    pub fn check_sector(&self, u: &Potential) -> Result<()> {
        if self.in_sector(u) {
            Ok(())
        } else {
            Err(Error::SingularityMismatch)
        }
    }

    pub fn energy(&self, u: &Potential) -> Result<Rational> {
        self.check_sector(u)?;
        let psi = self.psi.potential();
        let a = integrate_diff(u, psi, &ma(u))?;
        let b = integrate_diff(u, psi, &self.psi_ma)?;
        Ok(half() * (a + b))
    }

    /// Identity and sandwich for the energy difference of two sector
    /// potentials.
    pub fn energy_diff_identity(&self, u: &Potential, v: &Potential) -> Result<EnergyDiffReport> {
        let difference = self.energy(u)? - self.energy(v)?;
        let against_u = integrate_diff(u, v, &ma(u))?;
        let against_v = integrate_diff(u, v, &ma(v))?;
        let mixed_average = half() * (&against_u + &against_v);
        Ok(EnergyDiffReport { difference, mixed_average, against_u, against_v })
    }

    /// Canonical approximant `max(u, psi - j)`. Lives on a refined grid when
    /// the maximum crosses between nodes.
    pub fn canonical_approximant(&self, u: &Potential, j: &Rational) -> Result<Potential> {
        if !matches!(
            compare_singularity(u, self.psi.potential()),
            Singularity::MoreSingular | Singularity::Equivalent
        ) {
            return Err(Error::PreconditionViolated("u must be more singular than psi".into()));
        }
        if j <= &Rational::zero() {
            return Err(Error::PreconditionViolated("approximant index must be positive".into()));
        }
        pointwise_max(u, &self.psi.potential().shift(&-j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnergyDiffReport {
    /// `E(u) - E(v)`.
    #[serde(with = "serde_rat")]
    pub difference: Rational,
    /// `(1/2)[∫(u-v)dMA(u) + ∫(u-v)dMA(v)]`.
    #[serde(with = "serde_rat")]
    pub mixed_average: Rational,
    #[serde(with = "serde_rat")]
    pub against_u: Rational,
    #[serde(with = "serde_rat")]
    pub against_v: Rational,
}

impl EnergyDiffReport {
    pub fn identity_holds(&self) -> bool {
        self.difference == self.mixed_average
    }

    pub fn sandwich_holds(&self) -> bool {
        self.against_u <= self.difference && self.difference <= self.against_v
    }

    pub fn pass(&self) -> bool {
        self.identity_holds() && self.sandwich_holds()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid_convex::{Grid, SlopeInterval};
    use crate::rational::{int, rat};

    fn grid3() -> Arc<Grid> {
        Arc::new(Grid::uniform(int(-1), int(1), 2).unwrap())
    }

    fn kink() -> Potential {
        Potential::new(grid3(), vec![int(0), int(0), int(1)], int(0), int(1)).unwrap()
    }

    fn reference() -> Potential {
        Potential::new(grid3(), vec![int(0), rat(1, 2), int(1)], int(0), int(1)).unwrap()
    }

    fn ctx_ref() -> EnergyContext {
        let q = SlopeInterval::new(int(0), int(1)).unwrap();
        EnergyContext::new(ModelEnvelope::from_interval(&reference(), q).unwrap())
    }

    #[test]
    fn energy_examples() {
        let ctx = ctx_ref();
        assert_eq!(ctx.energy(&reference()).unwrap(), int(0));
        assert_eq!(ctx.energy(&kink()).unwrap(), rat(-1, 4));
        assert_eq!(ctx.energy(&kink().shift(&int(-1))).unwrap(), rat(-5, 4));
    }

    #[test]
    fn energy_rejects_other_sectors() {
        let ctx = ctx_ref();
        let half = Potential::new(grid3(), vec![int(0), int(0), rat(1, 2)], int(0), rat(1, 2)).unwrap();
        assert_eq!(ctx.energy(&half), Err(Error::SingularityMismatch));
    }

    #[test]
    fn diff_identity_examples() {
        let ctx = ctx_ref();
        let same = ctx.energy_diff_identity(&kink(), &kink()).unwrap();
        assert!(same.pass());
        assert!(same.difference.is_zero() && same.against_u.is_zero() && same.against_v.is_zero());

        let rep = ctx.energy_diff_identity(&reference(), &kink()).unwrap();
        assert_eq!(rep.difference, rat(1, 4));
        assert_eq!(rep.mixed_average, rat(1, 4));
        assert_eq!((rep.against_u.clone(), rep.against_v.clone()), (int(0), rat(1, 2)));
        assert!(rep.pass());
    }

    #[test]
    fn approximants() {
        let ctx = ctx_ref();
        let u = kink();
        assert_eq!(ctx.canonical_approximant(&u, &int(100)).unwrap(), u);
        let low = reference().shift(&int(-2));
        assert_eq!(ctx.canonical_approximant(&low, &int(1)).unwrap(), reference().shift(&int(-1)));

        let a = ctx.canonical_approximant(&u, &rat(1, 4)).unwrap();
        for x in [int(-2), rat(-1, 2), int(0), rat(1, 2), int(2)] {
            assert_eq!(a.eval(&x), u.eval(&x).max(reference().eval(&x) - rat(1, 4)));
        }
        // max(x, 0) vs x/2 + 1/4 crosses at -1/2 and 1/2
        assert_eq!(a.grid().len(), 5);
        // hand quadrature on the refined grid (-1, -1/2, 0, 1/2, 1):
        // a - ref = (0, -1/4, -1/4, -1/4, 0), MA(a) = 1/2 at -1/2 and 1/2,
        // MA(ref) = 1/2 at -1 and 1, so E = (1/2)(-1/8 - 1/8 + 0)
        assert_eq!(a.values(), &[int(0), int(0), rat(1, 4), rat(1, 2), int(1)]);
        assert_eq!(ctx.energy(&a).unwrap(), rat(-1, 8));
    }
}
