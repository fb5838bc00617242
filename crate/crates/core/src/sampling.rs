//! Seeded generators for random potentials and the standard lab settings.

use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid_convex::{rooftop, sup_diff, Grid, Potential, SlopeInterval, SupDiff};
use crate::rational::{int, rat, Rational};

pub type LabRng = ChaCha8Rng;

/// Independent, reproducible stream for trial `trial` of a run seeded `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> LabRng {
    LabRng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ trial)
}

/// Grid plus reference potential (the stand-in for the Kähler class).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setting {
    grid: Arc<Grid>,
    reference: Potential,
}

impl Setting {
    /// Validates that the reference spans the whole polytope and has a
    /// strictly positive slope jump at every node.
    pub fn new(reference: Potential) -> Result<Self> {
        let grid = reference.grid().clone();
        if reference.dual_domain() != *grid.polytope() {
            return Err(Error::Validation("reference must span the polytope".into()));
        }
        if let Some(i) = reference.jumps().iter().position(|j| j.is_zero()) {
            return Err(Error::DegenerateReference(i));
        }
        Ok(Setting { grid, reference })
    }

    /// Like [`Setting::new`] but accepts nodes where the reference has no
    /// kink. Entropy against such a reference is undefined, so entropy
    /// filters reject it later.
    pub fn allowing_flat(reference: Potential) -> Result<Self> {
        let grid = reference.grid().clone();
        if reference.dual_domain() != *grid.polytope() {
            return Err(Error::Validation("reference must span the polytope".into()));
        }
        Ok(Setting { grid, reference })
    }

    /// The three-node instance on `{-1, 0, 1}` with reference `(x + 1) / 2`
    /// clipped to slopes `[0, 1]`. Its reference has no kink at `0`, so it
    /// is only meant for hand-checkable examples, not entropy work.
    pub fn canonical() -> Self {
        let grid = Arc::new(Grid::uniform(int(-1), int(1), 2).expect("valid grid"));
        let reference = Potential::new(grid.clone(), vec![int(0), rat(1, 2), int(1)], int(0), int(1))
            .expect("valid reference");
        Setting { grid, reference }
    }

    /// `intervals + 1` equally spaced nodes on `[-2, 2]`, polytope `[0, 1]`,
    /// reference with chord slopes `(2k - 1) / (2m)`: jumps `1/(2m)` at the
    /// ends and `1/m` inside.
    pub fn standard(intervals: usize) -> Self {
        let grid = Arc::new(Grid::uniform(int(-2), int(2), intervals).expect("valid grid"));
        let m = intervals as i64;
        let mut values = vec![Rational::zero()];
        for k in 1..=m {
            let slope = rat(2 * k - 1, 2 * m);
            let dx = &grid.nodes()[k as usize] - &grid.nodes()[k as usize - 1];
            let next = &values[k as usize - 1] + slope * dx;
            values.push(next);
        }
        let reference = Potential::new(grid, values, int(0), int(1)).expect("valid reference");
        Setting::new(reference).expect("non-degenerate by construction")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn reference(&self) -> &Potential {
        &self.reference
    }

    pub fn polytope(&self) -> &SlopeInterval {
        self.grid.polytope()
    }
}

/// Random convex potential with dual domain exactly `interval`.
///
/// Chord slopes are drawn from the `denominator`-point lattice of the
/// interval and sorted; the first value is a random multiple of `1/4` in
/// `[-1, 1]`.
pub fn random_potential<R: Rng>(
    rng: &mut R,
    grid: &Arc<Grid>,
    interval: &SlopeInterval,
    denominator: u32,
) -> Potential {
    let x = grid.nodes();
    let span = interval.length();
    let mut chords: Vec<Rational> = (1..x.len())
        .map(|_| {
            let k = rng.gen_range(0..=denominator);
            &interval.lo + &span * rat(k.into(), denominator.into())
        })
        .collect();
    chords.sort();
    let mut values = vec![rat(rng.gen_range(-4..=4), 4)];
    for (k, c) in chords.iter().enumerate() {
        let next = &values[k] + c * (&x[k + 1] - &x[k]);
        values.push(next);
    }
    Potential::new(grid.clone(), values, interval.lo.clone(), interval.hi.clone())
        .expect("sorted chords inside the interval are convex")
}

/// Random potential below `u` in the same sector: `P(u, w)` for a random `w`
/// with the same dual domain.
pub fn random_below<R: Rng>(rng: &mut R, u: &Potential, denominator: u32) -> Potential {
    let w = random_potential(rng, u.grid(), &u.dual_domain(), denominator)
        .shift(&rat(rng.gen_range(-4..=2), 4));
    rooftop(u, &w).expect("same dual domain")
}

/// Shifts `u` so that `sup (u - reference)` equals `target`.
pub fn normalize_sup(u: &Potential, reference: &Potential, target: &Rational) -> Result<Potential> {
    match sup_diff(u, reference)? {
        SupDiff::Finite(s) => Ok(u.shift(&(target - s))),
        SupDiff::PlusInfinity => Err(Error::SingularityMismatch),
    }
}
