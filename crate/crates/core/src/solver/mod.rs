//! Finite-volume candidate generator with impermeable walls.
//!
//! Each step updates the conservative variables `(rho, m, E)` with a
//! first-order flux, optionally applies an implicit artificial viscosity
//! `eps u_xx` to the velocity, and checks vacuum, pressure positivity and the
//! entropy floor. Energy removed by the viscosity goes to a spatially
//! uniform internal-energy defect so that energy plus defects stays `E0`.

pub mod candidates;
pub mod flux;
pub mod riemann;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{solve_tridiagonal, Real};
use crate::state::{DefectState, FluidState, Grid, StateError};
use crate::thermo::{GasConstants, ThermoPoint};
use crate::trajectory::{InitialDatum, Node, Snapshot, Trajectory, TrajectoryError};

pub use candidates::{generate_candidates, EXACT_PREFIX, EXPANSION_SHOCK_PREFIX, generate_riemann_candidates, riemann_trajectory, SetError, SolutionSet};
pub use flux::Conserved;
pub use riemann::{riemann_exact, riemann_expansion_shock, Primitive, RiemannDatum, RiemannError, RiemannProblem, RiemannSolution};

/// Density below which a cell counts as vacuum.
pub const VACUUM_FLOOR: f64 = 1e-12;
/// Slack of the per-cell entropy-floor check, relative to `max(1, rho)`.
pub const FLOOR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    LaxFriedrichs,
    Rusanov,
    Hllc,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::LaxFriedrichs => "lax_friedrichs",
            SchemeKind::Rusanov => "rusanov",
            SchemeKind::Hllc => "hllc",
        }
    }

    pub fn all() -> [SchemeKind; 3] {
        [SchemeKind::LaxFriedrichs, SchemeKind::Rusanov, SchemeKind::Hllc]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig<T> {
    pub scheme: SchemeKind,
    pub epsilon: T,
    pub cfl: T,
    pub cells: usize,
    pub length: T,
    pub t_end: T,
    pub dt_out: T,
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(scheme: SchemeKind, cells: usize, length: T, t_end: T, dt_out: T) -> Self {
        Self { scheme, epsilon: T::zero(), cfl: T::of(0.4), cells, length, t_end, dt_out }
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_cfl(mut self, cfl: T) -> Self {
        self.cfl = cfl;
        self
    }

    /// Deterministic label encoding scheme, viscosity and grid.
    pub fn id(&self) -> String {
        format!("{}-eps{:e}-n{}", self.scheme.name(), self.epsilon, self.cells)
    }

    pub fn grid(&self) -> Result<Grid<T>, StateError> {
        Grid::new(self.cells, self.length)
    }

    /// Number of output intervals; `t_end` must be a whole multiple of `dt_out`.
    pub fn output_steps(&self) -> Result<usize, SolverError> {
        self.validate()?;
        let k = (self.t_end / self.dt_out).round();
        if (k * self.dt_out - self.t_end).abs() > T::of(1e-12) * self.t_end {
            return Err(SolverError::InvalidConfig("t_end must be a whole multiple of dt_out".into()));
        }
        Ok(k.to_usize().unwrap_or(0))
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.into()));
        if !(self.cfl > T::zero() && self.cfl < T::one()) {
            return bad("cfl must lie in (0, 1)");
        }
        if self.cells < 4 {
            return bad("at least 4 cells");
        }
        if !(self.epsilon >= T::zero()) {
            return bad("epsilon must be nonnegative");
        }
        if !(self.length > T::zero()) {
            return bad("length must be positive");
        }
        if !(self.dt_out > T::zero() && self.t_end >= self.dt_out) {
            return bad("need 0 < dt_out <= t_end");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(String),
    #[error("time step underflow at t = {t} (CFL step {dt})")]
    Cfl { t: f64, dt: f64 },
    #[error("vacuum in cell {cell} at t = {t}: rho = {rho}")]
    Vacuum { cell: usize, t: f64, rho: f64 },
    #[error("nonpositive pressure in cell {cell} at t = {t}")]
    NegativePressure { cell: usize, t: f64 },
    #[error("entropy floor violated in cell {cell} at t = {t} by {excess}")]
    EntropyFloor { cell: usize, t: f64, excess: f64 },
    #[error("empty scheme suite")]
    EmptySuite,
    #[error("every candidate failed: {0}")]
    AllFailed(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Riemann(#[from] RiemannError),
    #[error(transparent)]
    Set(#[from] SetError),
}

struct Scheme<'a, T> {
    cfg: &'a SchemeConfig<T>,
    gas: &'a GasConstants<T>,
    dx: T,
    u: Vec<Conserved<T>>,
    /// Entropy from which the current `E` was computed.
    entropy: Vec<T>,
    fluxes: Vec<Conserved<T>>,
}

impl<'a, T: Real> Scheme<'a, T> {
    fn max_speed(&self) -> T {
        let g = self.gas.gamma();
        self.u.iter().fold(T::zero(), |a, c| a.max(c.velocity().abs() + c.sound_speed(g)))
    }

    fn step(&mut self, dt: T, t: T) -> Result<(), SolverError> {
        let g = self.gas.gamma();
        let n = self.u.len();
        let ratio = self.dx / dt;
        for f in 0..=n {
            let l = if f == 0 { self.u[0].mirrored() } else { self.u[f - 1] };
            let r = if f == n { self.u[n - 1].mirrored() } else { self.u[f] };
            let mut flux = match self.cfg.scheme {
                SchemeKind::LaxFriedrichs => flux::lax_friedrichs(&l, &r, g, ratio),
                SchemeKind::Rusanov => flux::rusanov(&l, &r, g),
                SchemeKind::Hllc => flux::hllc(&l, &r, g),
            };
            if f == 0 || f == n {
                flux.rho = T::zero();
                flux.e = T::zero();
            }
            self.fluxes[f] = flux;
        }
        let lambda = dt / self.dx;
        for i in 0..n {
            let (a, b) = (self.fluxes[i], self.fluxes[i + 1]);
            let c = &mut self.u[i];
            c.rho -= lambda * (b.rho - a.rho);
            c.m -= lambda * (b.m - a.m);
            c.e -= lambda * (b.e - a.e);
        }
        let floor = T::of(VACUUM_FLOOR);
        for (cell, c) in self.u.iter().enumerate() {
            if !(c.rho >= floor) {
                return Err(SolverError::Vacuum { cell, t: t.as_f64(), rho: c.rho.as_f64() });
            }
            if !(c.pressure(g) > T::zero()) {
                return Err(SolverError::NegativePressure { cell, t: t.as_f64() });
            }
        }
        if self.cfg.epsilon > T::zero() {
            self.viscosity(dt);
        }
        self.check_floor(t)?;
        self.canonicalize()
    }

    /// Replaces `E` by its value recomputed from `(rho, m, S)`, so that the
    /// stored fields alone determine the continuation of the run.
    fn canonicalize(&mut self) -> Result<(), SolverError> {
        for (cell, c) in self.u.iter_mut().enumerate() {
            let s = entropy_of(c, self.gas);
            self.entropy[cell] = s;
            let pt = ThermoPoint::new(c.rho, c.m, s);
            c.e = self.gas.total_energy_density(&pt).map_err(StateError::from)?.finite().ok_or(StateError::InfiniteEnergy { cell })?;
        }
        Ok(())
    }

    /// Backward-Euler step of `rho u_t = eps u_xx` with Neumann ends; density
    /// and internal energy are left untouched.
    fn viscosity(&mut self, dt: T) {
        let n = self.u.len();
        let k = self.cfg.epsilon * dt / (self.dx * self.dx);
        let mut lower = vec![-k; n];
        let mut upper = vec![-k; n];
        let mut diag: Vec<T> = self.u.iter().map(|c| c.rho + T::of(2.0) * k).collect();
        lower[0] = T::zero();
        upper[n - 1] = T::zero();
        diag[0] -= k;
        diag[n - 1] -= k;
        let rhs: Vec<T> = self.u.iter().map(|c| c.m).collect();
        let vel = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for (c, v) in self.u.iter_mut().zip(vel) {
            let m_new = c.rho * v;
            c.e = c.e - T::of(0.5) * c.m * c.m / c.rho + T::of(0.5) * m_new * m_new / c.rho;
            c.m = m_new;
        }
    }

    fn check_floor(&self, t: T) -> Result<(), SolverError> {
        let s0 = self.gas.entropy_floor();
        for (cell, c) in self.u.iter().enumerate() {
            let s = entropy_of(c, self.gas);
            let excess = s0 * c.rho - s;
            if excess > T::of(FLOOR_TOLERANCE) * c.rho.max(T::one()) {
                return Err(SolverError::EntropyFloor { cell, t: t.as_f64(), excess: excess.as_f64() });
            }
        }
        Ok(())
    }

    fn snapshot(&self, t: T, grid: &Grid<T>, budget: T) -> Result<Snapshot<T>, SolverError> {
        let mut state = FluidState::uniform(self.u.len(), T::zero(), T::zero(), T::zero());
        for (i, c) in self.u.iter().enumerate() {
            state.rho[i] = c.rho;
            state.momentum[i] = c.m;
            state.entropy[i] = self.entropy[i];
        }
        let energy = state.total_energy(grid, self.gas)?;
        let h = ((budget - energy) / grid.length).max(T::zero());
        Ok(Snapshot { t, state, defects: DefectState::uniform_internal(grid.cells, h) })
    }
}

/// `S = rho (c_v ln(p / rho) - ln rho)`
fn entropy_of<T: Real>(c: &Conserved<T>, gas: &GasConstants<T>) -> T {
    let theta = c.pressure(gas.gamma()) / c.rho;
    c.rho * (gas.c_v() * theta.ln() - c.rho.ln())
}

/// Runs one scheme from `datum` and records the state every `dt_out`.
///
/// Each output interval is integrated on its own clock so that a restart
/// from any output node reproduces the remaining nodes bit for bit.
pub fn simulate<T: Real>(datum: &InitialDatum<T>, cfg: &SchemeConfig<T>, gas: &GasConstants<T>) -> Result<Trajectory<T>, SolverError> {
    let steps = cfg.output_steps()?;
    let grid = cfg.grid()?;
    datum.state.check_shape(&grid)?;
    if let Some(cell) = datum.state.rho.iter().position(|&r| !(r >= T::of(VACUUM_FLOOR))) {
        return Err(SolverError::Vacuum { cell, t: 0.0, rho: datum.state.rho[cell].as_f64() });
    }
    let energy = datum.state.energy_density(gas)?;
    let u = (0..grid.cells)
        .map(|i| Conserved { rho: datum.state.rho[i], m: datum.state.momentum[i], e: energy[i] })
        .collect();
    let entropy = datum.state.entropy.clone();
    let mut scheme = Scheme { cfg, gas, dx: grid.dx(), u, entropy, fluxes: vec![Conserved { rho: T::zero(), m: T::zero(), e: T::zero() }; grid.cells + 1] };
    let budget = datum.energy;
    let mut nodes = Vec::with_capacity(steps + 1);
    nodes.push(Node::continuous(datum.snapshot(&grid, gas)?));
    for k in 1..=steps {
        let t0 = T::of_usize(k - 1) * cfg.dt_out;
        let mut local = T::zero();
        while local < cfg.dt_out {
            let a = scheme.max_speed();
            let dt_cfl = cfg.cfl * grid.dx() / a;
            if !(dt_cfl > T::of(1e-12) * cfg.dt_out) {
                return Err(SolverError::Cfl { t: (t0 + local).as_f64(), dt: dt_cfl.as_f64() });
            }
            let remaining = cfg.dt_out - local;
            let dt = if dt_cfl >= remaining { remaining } else { dt_cfl };
            scheme.step(dt, t0 + local)?;
            local = if dt == remaining { cfg.dt_out } else { local + dt };
        }
        let t = T::of_usize(k) * cfg.dt_out;
        nodes.push(Node::continuous(scheme.snapshot(t, &grid, budget)?));
    }
    Ok(Trajectory::new(cfg.id(), grid, *gas, cfg.dt_out, datum.clone(), nodes)?)
}

/// `rho = 1 + a cos(pi x / L)` at rest with constant specific entropy `s`.
pub fn density_bump<T: Real>(grid: &Grid<T>, amplitude: T, s: T) -> FluidState<T> {
    let rho: Vec<T> = grid
        .centers()
        .iter()
        .map(|&x| T::one() + amplitude * (T::PI() * x / grid.length).cos())
        .collect();
    let entropy = rho.iter().map(|&r| r * s).collect();
    FluidState { momentum: vec![T::zero(); grid.cells], rho, entropy }
}

/// Isentropic Gaussian pulse at rest, `rho = 1 + a exp(-((x - L/2) / w)^2)`
/// with `s = 0`, i.e. `p = rho^gamma`.
pub fn smooth_pulse<T: Real>(grid: &Grid<T>, amplitude: T, width: T) -> FluidState<T> {
    let half = grid.length / T::of(2.0);
    let rho: Vec<T> = grid
        .centers()
        .iter()
        .map(|&x| {
            let z = (x - half) / width;
            T::one() + amplitude * (-z * z).exp()
        })
        .collect();
    FluidState { momentum: vec![T::zero(); grid.cells], entropy: vec![T::zero(); grid.cells], rho }
}
