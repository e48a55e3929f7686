//! Constant states maximizing the total entropy at fixed mass and energy,
//! and audits of their maximality and stability under selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::selection::{sieve_select, SelectionError, SelectionParams};
use crate::solver::{generate_candidates, SchemeConfig, SolverError};
use crate::state::{FluidState, Grid, StateError};
use crate::thermo::{GasConstants, ThermoError, ThermoPoint};
use crate::trajectory::{InitialDatum, Side, Trajectory, TrajectoryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("datum is not the equilibrium state: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState<T> {
    pub rho_bar: T,
    pub s_bar: T,
    pub energy: T,
    pub mass: T,
    pub length: T,
}

/// `rho_bar = M / L`, `S_bar = c_v rho_bar ln(E0 / (c_v L rho_bar^gamma))`.
pub fn equilibrium_state<T: Real>(mass: T, energy: T, length: T, gas: &GasConstants<T>) -> Result<EquilibriumState<T>, EquilibriumError> {
    for (name, v) in [("mass", mass), ("energy", energy), ("length", length)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(EquilibriumError::NonPositive(name));
        }
    }
    let rho_bar = mass / length;
    let c_v = gas.c_v();
    let s_bar = c_v * rho_bar * (energy / (c_v * length * rho_bar.powf(gas.gamma()))).ln();
    Ok(EquilibriumState { rho_bar, s_bar, energy, mass, length })
}

impl<T: Real> EquilibriumState<T> {
    pub fn total_entropy(&self) -> T {
        self.s_bar * self.length
    }

    /// Energy of the constant state, `c_v rho^gamma exp(S/(c_v rho)) L`.
    pub fn energy_of_state(&self, gas: &GasConstants<T>) -> Result<T, EquilibriumError> {
        let e = gas.internal_energy_density(&ThermoPoint::at_rest(self.rho_bar, self.s_bar))?;
        Ok(e.to_float() * self.length)
    }

    pub fn grid(&self, cells: usize) -> Result<Grid<T>, EquilibriumError> {
        Ok(Grid::new(cells, self.length)?)
    }

    pub fn fluid_state(&self, cells: usize) -> FluidState<T> {
        FluidState::uniform(cells, self.rho_bar, T::zero(), self.s_bar)
    }

    /// Equilibrium datum with budget `E0`.
    pub fn datum(&self, cells: usize, gas: &GasConstants<T>) -> Result<InitialDatum<T>, EquilibriumError> {
        Ok(InitialDatum::new(self.fluid_state(cells), self.energy, &self.grid(cells)?, gas)?)
    }

    /// Errors unless `datum` carries the constant equilibrium fields and `E0`.
    pub fn check_datum(&self, datum: &InitialDatum<T>, tol: T) -> Result<(), EquilibriumError> {
        let scale = T::one().max(self.rho_bar.abs()).max(self.s_bar.abs());
        let dev = datum.state.max_abs_diff(&self.fluid_state(datum.state.cells()));
        if dev > tol * scale {
            return Err(EquilibriumError::Mismatch(format!("fields deviate by {dev:e}")));
        }
        if (datum.energy - self.energy).abs() > tol * self.energy {
            return Err(EquilibriumError::Mismatch(format!("energy {:e} differs from E0 {:e}", datum.energy, self.energy)));
        }
        Ok(())
    }
}

fn field_energy<T: Real>(rho: &[T], entropy: &[T], shift: T, grid: &Grid<T>, gas: &GasConstants<T>) -> T {
    let mut total = T::zero();
    for (&r, &s) in rho.iter().zip(entropy) {
        match gas.internal_energy_density(&ThermoPoint::at_rest(r, s + shift)) {
            Ok(e) => total += e.to_float(),
            Err(_) => return T::infinity(),
        }
    }
    total * grid.dx()
}

/// Shifts `entropy` uniformly so that `int c_v rho^gamma exp(S/(c_v rho)) = E0`,
/// by bisection to `1e-12`. `None` when no bracket is found.
pub fn fit_entropy_shift<T: Real>(
    rho: &[T],
    entropy: &[T],
    energy: T,
    grid: &Grid<T>,
    gas: &GasConstants<T>,
) -> Option<Vec<T>> {
    let f = |c: T| field_energy(rho, entropy, c, grid, gas) - energy;
    let (mut lo, mut hi) = (-T::one(), T::one());
    let mut expansions = 0;
    while !(f(lo) < T::zero()) {
        lo *= T::of(2.0);
        expansions += 1;
        if expansions > 200 {
            return None;
        }
    }
    while !(f(hi) > T::zero()) {
        hi *= T::of(2.0);
        expansions += 1;
        if expansions > 400 {
            return None;
        }
    }
    let tol = T::of(1e-12);
    while hi - lo > tol * T::one().max(lo.abs()) {
        let mid = T::of(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = T::of(0.5) * (lo + hi);
    Some(entropy.iter().map(|&s| s + c).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerAudit<T> {
    pub samples: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Minimum of `int S_bar - int S` over accepted samples.
    pub min_gap: T,
    /// Largest relative energy residual after the entropy fit.
    pub max_energy_residual: T,
}

/// Violation threshold on `int S - int S_bar`.
pub const MAXIMIZER_TOLERANCE: f64 = 1e-10;

/// Draws `samples` random nonconstant fields with `int rho = M` and
/// `int rho e = E0`, and checks that none beats the equilibrium entropy.
/// Sample `k` uses ChaCha stream `k` of `seed`.
pub fn maximizer_audit<T: Real>(
    eq: &EquilibriumState<T>,
    samples: usize,
    cells: usize,
    seed: u64,
    gas: &GasConstants<T>,
) -> Result<MaximizerAudit<T>, EquilibriumError> {
    let grid = eq.grid(cells)?;
    let target = eq.total_entropy();
    let mut report = MaximizerAudit {
        samples,
        skipped: 0,
        violations: 0,
        min_gap: T::infinity(),
        max_energy_residual: T::zero(),
    };
    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let amp_rho: f64 = rng.gen_range(0.0..0.9);
        let amp_s: f64 = rng.gen_range(0.0..2.0);
        let raw: Vec<T> = (0..cells).map(|_| T::of(1.0 + amp_rho * rng.gen_range(-1.0..1.0))).collect();
        let scale = eq.mass / grid.integrate(&raw);
        let rho: Vec<T> = raw.iter().map(|&r| r * scale).collect();
        let entropy: Vec<T> = rho.iter().map(|&r| r * T::of(amp_s * rng.gen_range(-1.0..1.0))).collect();
        let Some(fitted) = fit_entropy_shift(&rho, &entropy, eq.energy, &grid, gas) else {
            report.skipped += 1;
            continue;
        };
        let residual = (field_energy(&rho, &fitted, T::zero(), &grid, gas) - eq.energy).abs() / eq.energy;
        report.max_energy_residual = report.max_energy_residual.max(residual);
        let gap = target - grid.integrate(&fitted);
        if -gap > T::of(MAXIMIZER_TOLERANCE) {
            report.violations += 1;
        }
        report.min_gap = report.min_gap.min(gap);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub selected: String,
    /// Max-norm distance of the selected fields from equilibrium over all nodes.
    pub max_deviation: T,
    /// `sup |sigma|` of the selected trajectory.
    pub max_sigma: T,
    pub rejected: Vec<String>,
    pub tol: T,
    pub pass: bool,
}

fn deviation<T: Real>(traj: &Trajectory<T>, eq: &EquilibriumState<T>) -> T {
    let target = eq.fluid_state(traj.grid().cells);
    traj.nodes()
        .iter()
        .flat_map(|n| [n.left(), n.side(Side::Right)])
        .map(|s| s.state.max_abs_diff(&target))
        .fold(T::zero(), T::max)
}

/// Selects among the suite's candidates from the equilibrium datum, plus
/// any `injected` trajectories, and checks that the selection is the
/// constant state with `sigma = 0` to `tol`.
pub fn equilibrium_stability_audit<T: Real>(
    eq: &EquilibriumState<T>,
    datum: &InitialDatum<T>,
    suite: &[SchemeConfig<T>],
    gas: &GasConstants<T>,
    params: &SelectionParams<T>,
    injected: Vec<Trajectory<T>>,
    tol: T,
) -> Result<StabilityReport<T>, EquilibriumError> {
    eq.check_datum(datum, tol)?;
    let mut set = generate_candidates(datum, suite, gas)?;
    for t in injected {
        set.push(t).map_err(SolverError::from)?;
    }
    let (chosen, _) = sieve_select(&set, params)?;
    let max_deviation = deviation(chosen, eq);
    let max_sigma = chosen.sigma_history().sup_norm();
    let rejected = set.members().iter().filter(|m| m.id() != chosen.id()).map(|m| m.id().to_string()).collect();
    Ok(StabilityReport {
        selected: chosen.id().to_string(),
        max_deviation,
        max_sigma,
        rejected,
        tol,
        pass: max_deviation <= tol && max_sigma <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalReport<T> {
    /// First node time at which `traj` sits at the equilibrium, if any.
    pub arrival: Option<T>,
    pub continuation: Option<StabilityReport<T>>,
}

/// If `traj` reaches the equilibrium at a node time `T`, restarts the suite
/// from `traj(T-)` with the same budget and checks the selected
/// continuation stays there.
pub fn arrival_audit<T: Real>(
    traj: &Trajectory<T>,
    eq: &EquilibriumState<T>,
    suite: &[SchemeConfig<T>],
    gas: &GasConstants<T>,
    params: &SelectionParams<T>,
    tol: T,
) -> Result<ArrivalReport<T>, EquilibriumError> {
    let target = eq.fluid_state(traj.grid().cells);
    let arrival = traj
        .nodes()
        .iter()
        .find(|n| n.left().state.max_abs_diff(&target) <= tol)
        .map(|n| n.t());
    let Some(at) = arrival else {
        return Ok(ArrivalReport { arrival: None, continuation: None });
    };
    let state = traj.eval(at, Side::Left)?.state.clone();
    let restart = InitialDatum::new(state, traj.energy_budget(), traj.grid(), gas)?;
    let local = EquilibriumState { energy: traj.energy_budget(), ..*eq };
    let mut set = generate_candidates(&restart, suite, gas)?;
    set.failures.clear();
    let (chosen, _) = sieve_select(&set, params)?;
    let max_deviation = deviation(chosen, &local);
    let max_sigma = chosen.sigma_history().sup_norm();
    let report = StabilityReport {
        selected: chosen.id().to_string(),
        max_deviation,
        max_sigma,
        rejected: vec![],
        tol,
        pass: max_deviation <= tol && max_sigma <= tol,
    };
    Ok(ArrivalReport { arrival, continuation: Some(report) })
}
