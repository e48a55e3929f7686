//! Synthetic trajectories with a prescribed entropy curve, for exercising
//! the orders and the sieve without running a solver.

use crate::scalar::Real;
use crate::state::{DefectState, FluidState, Grid};
use crate::thermo::GasConstants;
use crate::trajectory::{InitialDatum, Node, Snapshot, Trajectory, TrajectoryError};

/// Shape shared by every member of a fixture family, so that members share
/// one datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyFixture<T> {
    pub cells: usize,
    pub dt: T,
    /// Datum entropy density.
    pub s_datum: T,
    /// The energy budget is that of the uniform state with this entropy.
    pub s_budget: T,
}

impl<T: Real> Default for EntropyFixture<T> {
    fn default() -> Self {
        Self { cells: 4, dt: T::of(0.5), s_datum: T::zero(), s_budget: T::of(2.0) }
    }
}

impl<T: Real> EntropyFixture<T> {
    pub fn grid(&self) -> Grid<T> {
        Grid::new(self.cells, T::one()).expect("positive length")
    }

    fn snapshot(&self, t: T, s: T, budget: T, gas: &GasConstants<T>) -> Result<Snapshot<T>, TrajectoryError> {
        let grid = self.grid();
        let state = FluidState::uniform(self.cells, T::one(), T::zero(), s);
        let gap = (budget - state.total_energy(&grid, gas)?) / grid.length;
        Ok(Snapshot { t, state, defects: DefectState::uniform_internal(self.cells, gap) })
    }

    /// Uniform `rho = 1`, `m = 0` on the unit interval with entropy density
    /// `right[k]` after node `k = t / dt` and `left[k]` before it.
    pub fn build(&self, id: &str, left: &[T], right: &[T], gas: &GasConstants<T>) -> Result<Trajectory<T>, TrajectoryError> {
        assert_eq!(left.len(), right.len(), "left and right entropy samples differ in length");
        let grid = self.grid();
        let budget = FluidState::uniform(self.cells, T::one(), T::zero(), self.s_budget).total_energy(&grid, gas)?;
        let datum = InitialDatum::new(FluidState::uniform(self.cells, T::one(), T::zero(), self.s_datum), budget, &grid, gas)?;
        let mut nodes = Vec::with_capacity(right.len());
        for k in 0..right.len() {
            let t = T::of_usize(k) * self.dt;
            let r = self.snapshot(t, right[k], budget, gas)?;
            nodes.push(if k == 0 || left[k] == right[k] {
                Node::continuous(r)
            } else {
                Node::jump(self.snapshot(t, left[k], budget, gas)?, r)
            });
        }
        Trajectory::new(id, grid, *gas, self.dt, datum, nodes)
    }

    /// Continuous entropy curve `s(k dt) = samples[k]`.
    pub fn continuous(&self, id: &str, samples: &[T], gas: &GasConstants<T>) -> Result<Trajectory<T>, TrajectoryError> {
        self.build(id, samples, samples, gas)
    }
}
