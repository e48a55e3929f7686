//! Trajectories of BV-in-time dissipative solutions sampled at nodes.
//!
//! A trajectory stores, at every node time, the right value and (only when
//! it differs) the left value. Density and momentum never jump; entropy and
//! the defects may. Between nodes the trajectory is piecewise constant and
//! equals the most recent right value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::ScalarHistory;
use crate::scalar::Real;
use crate::state::{DefectState, FieldWeights, FluidState, Grid, SmoothingNorm, StateError};
use crate::thermo::{GasConstants, ThermoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error("trajectory has no nodes")]
    Empty,
    #[error("first node must sit at t = 0 with no separate left value")]
    BadFirstNode,
    #[error("node times must be strictly increasing (node {0})")]
    NonIncreasing(usize),
    #[error("snapshot time does not match node time at node {0}")]
    SnapshotTime(usize),
    #[error("{field} jumps across node {node}; only entropy and defects may jump")]
    Discontinuous { node: usize, field: &'static str },
    #[error("first node does not start from the datum ({0})")]
    DatumMismatch(&'static str),
    #[error("datum energy {energy} exceeds the budget {budget}")]
    DatumEnergy { energy: f64, budget: f64 },
    #[error("datum violates the entropy floor in cell {cell} by {excess}")]
    DatumEntropyFloor { cell: usize, excess: f64 },
    #[error("t = {t} outside [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("shift {0} must lie in (0, horizon)")]
    InvalidShift(f64),
    #[error("continuation datum does not equal the left value at the junction")]
    ContinuationIncompatible,
    #[error("trajectories live on different grids or gases")]
    GridMismatch,
}

/// Admissible initial data: fields plus the total energy budget `E0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum<T> {
    pub state: FluidState<T>,
    pub energy: T,
}

impl<T: Real> InitialDatum<T> {
    /// Validates membership in the admissible data set: nonnegative density,
    /// entropy above the floor and finite energy not exceeding `energy`.
    pub fn new(state: FluidState<T>, energy: T, grid: &Grid<T>, gas: &GasConstants<T>) -> Result<Self, TrajectoryError> {
        state.check_shape(grid)?;
        let tol = T::of(1e-10);
        let (cell, excess) = state.entropy_floor_violation(gas);
        if excess > tol * state.rho[cell].max(T::one()) {
            return Err(TrajectoryError::DatumEntropyFloor { cell, excess: excess.as_f64() });
        }
        let e = state.total_energy(grid, gas)?;
        if e > energy + T::of(1e-12) * energy.abs().max(T::one()) {
            return Err(TrajectoryError::DatumEnergy { energy: e.as_f64(), budget: energy.as_f64() });
        }
        Ok(Self { state, energy })
    }

    /// Datum whose budget is exactly its own energy.
    pub fn tight(state: FluidState<T>, grid: &Grid<T>, gas: &GasConstants<T>) -> Result<Self, TrajectoryError> {
        state.check_shape(grid)?;
        let e = state.total_energy(grid, gas)?;
        Self::new(state, e, grid, gas)
    }

    /// The `0-` snapshot: any energy gap sits in a uniform internal defect.
    pub fn snapshot(&self, grid: &Grid<T>, gas: &GasConstants<T>) -> Result<Snapshot<T>, TrajectoryError> {
        let e = self.state.total_energy(grid, gas)?;
        let gap = ((self.energy - e) / grid.length).max(T::zero());
        Ok(Snapshot {
            t: T::zero(),
            state: self.state.clone(),
            defects: DefectState::uniform_internal(grid.cells, gap),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<T> {
    pub t: T,
    pub state: FluidState<T>,
    pub defects: DefectState<T>,
}

impl<T: Real> Snapshot<T> {
    /// Energy of the fields plus the defect mass.
    pub fn energy_with_defects(&self, grid: &Grid<T>, gas: &GasConstants<T>) -> Result<T, StateError> {
        Ok(self.state.total_energy(grid, gas)? + self.defects.total(grid))
    }

    fn at(mut self, t: T) -> Self {
        self.t = t;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node<T> {
    pub left: Option<Snapshot<T>>,
    pub right: Snapshot<T>,
}

impl<T: Real> Node<T> {
    /// Continuous node.
    pub fn continuous(snapshot: Snapshot<T>) -> Self {
        Self { left: None, right: snapshot }
    }

    /// Node with one-sided values; collapses to a continuous node when they agree.
    pub fn jump(left: Snapshot<T>, right: Snapshot<T>) -> Self {
        if left == right {
            Self::continuous(right)
        } else {
            Self { left: Some(left), right }
        }
    }

    pub fn t(&self) -> T {
        self.right.t
    }

    pub fn left(&self) -> &Snapshot<T> {
        self.left.as_ref().unwrap_or(&self.right)
    }

    pub fn side(&self, side: Side) -> &Snapshot<T> {
        match side {
            Side::Left => self.left(),
            Side::Right => &self.right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    id: String,
    grid: Grid<T>,
    gas: GasConstants<T>,
    dt_out: T,
    admissible: bool,
    datum: InitialDatum<T>,
    origin: Snapshot<T>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Checks the structural invariants: node 0 at `t = 0` starting from the
    /// datum, strictly increasing times, well-formed snapshots, and density
    /// and momentum continuous across every node.
    ///
    /// Physical admissibility (energy ledger, entropy growth, entropy floor)
    /// is not enforced here; see [`crate::check`].
    pub fn new(
        id: impl Into<String>,
        grid: Grid<T>,
        gas: GasConstants<T>,
        dt_out: T,
        datum: InitialDatum<T>,
        nodes: Vec<Node<T>>,
    ) -> Result<Self, TrajectoryError> {
        let origin = datum.snapshot(&grid, &gas)?;
        Self::with_origin(id.into(), grid, gas, dt_out, datum, origin, nodes)
    }

    /// Rebuilds a trajectory from stored parts, including an explicit `0-`
    /// snapshot (which differs from the datum snapshot after a shift).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        id: impl Into<String>,
        grid: Grid<T>,
        gas: GasConstants<T>,
        dt_out: T,
        admissible: bool,
        datum: InitialDatum<T>,
        origin: Snapshot<T>,
        nodes: Vec<Node<T>>,
    ) -> Result<Self, TrajectoryError> {
        if origin.t != T::zero() || origin.state != datum.state {
            return Err(TrajectoryError::DatumMismatch("origin"));
        }
        origin.defects.check_shape(&grid)?;
        let mut out = Self::with_origin(id.into(), grid, gas, dt_out, datum, origin, nodes)?;
        out.admissible = admissible;
        Ok(out)
    }

    fn with_origin(
        id: String,
        grid: Grid<T>,
        gas: GasConstants<T>,
        dt_out: T,
        datum: InitialDatum<T>,
        origin: Snapshot<T>,
        nodes: Vec<Node<T>>,
    ) -> Result<Self, TrajectoryError> {
        let first = nodes.first().ok_or(TrajectoryError::Empty)?;
        if first.t() != T::zero() || first.left.is_some() {
            return Err(TrajectoryError::BadFirstNode);
        }
        if first.right.state.rho != datum.state.rho {
            return Err(TrajectoryError::DatumMismatch("rho"));
        }
        if first.right.state.momentum != datum.state.momentum {
            return Err(TrajectoryError::DatumMismatch("momentum"));
        }
        for (k, node) in nodes.iter().enumerate() {
            if k > 0 && !(node.t() > nodes[k - 1].t()) {
                return Err(TrajectoryError::NonIncreasing(k));
            }
            for snap in [Some(&node.right), node.left.as_ref()].into_iter().flatten() {
                if snap.t != node.t() {
                    return Err(TrajectoryError::SnapshotTime(k));
                }
                snap.state.check_shape(&grid)?;
                snap.defects.check_shape(&grid)?;
            }
            if let Some(left) = &node.left {
                if left.state.rho != node.right.state.rho {
                    return Err(TrajectoryError::Discontinuous { node: k, field: "rho" });
                }
                if left.state.momentum != node.right.state.momentum {
                    return Err(TrajectoryError::Discontinuous { node: k, field: "momentum" });
                }
            }
        }
        Ok(Self { id, grid, gas, dt_out, admissible: true, datum, origin, nodes })
    }

    /// Marks the trajectory as violating the entropy condition.
    pub fn non_admissible(mut self) -> Self {
        self.admissible = false;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn gas(&self) -> &GasConstants<T> {
        &self.gas
    }

    pub fn dt_out(&self) -> T {
        self.dt_out
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn datum(&self) -> &InitialDatum<T> {
        &self.datum
    }

    pub fn energy_budget(&self) -> T {
        self.datum.energy
    }

    /// The `0-` snapshot.
    pub fn origin(&self) -> &Snapshot<T> {
        &self.origin
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn node_times(&self) -> Vec<T> {
        self.nodes.iter().map(Node::t).collect()
    }

    pub fn horizon(&self) -> T {
        self.nodes.last().unwrap().t()
    }

    /// Same grid, gas, datum and nodes; ids and metadata are ignored.
    pub fn same_evolution(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.gas == other.gas
            && self.datum == other.datum
            && self.origin == other.origin
            && self.nodes == other.nodes
    }

    /// Index of the last node with time `<= t`.
    fn locate(&self, t: T) -> Result<usize, TrajectoryError> {
        let horizon = self.horizon();
        if t < T::zero() || t > horizon || t.is_nan() {
            return Err(TrajectoryError::OutOfHorizon { t: t.as_f64(), horizon: horizon.as_f64() });
        }
        Ok(self.nodes.partition_point(|n| n.t() <= t) - 1)
    }

    /// One-sided value at `t`. Between nodes this is the stored snapshot of
    /// the preceding node, whose `t` field is that node's time.
    pub fn eval(&self, t: T, side: Side) -> Result<&Snapshot<T>, TrajectoryError> {
        let k = self.locate(t)?;
        let node = &self.nodes[k];
        if node.t() == t {
            if k == 0 && side == Side::Left {
                return Ok(&self.origin);
            }
            return Ok(node.side(side));
        }
        Ok(&node.right)
    }

    /// `t -> xi(T + t)` with the datum `xi(T-)`.
    pub fn time_shift(&self, shift: T) -> Result<Self, TrajectoryError> {
        if !(shift > T::zero()) || !(shift < self.horizon()) {
            return Err(TrajectoryError::InvalidShift(shift.as_f64()));
        }
        let origin = self.eval(shift, Side::Left)?.clone().at(T::zero());
        let start = self.eval(shift, Side::Right)?.clone().at(T::zero());
        let k = self.locate(shift)?;
        let mut nodes = vec![Node::continuous(start)];
        for node in &self.nodes[k + 1..] {
            let t = node.t() - shift;
            nodes.push(Node {
                left: node.left.clone().map(|s| s.at(t)),
                right: node.right.clone().at(t),
            });
        }
        let datum = InitialDatum { state: origin.state.clone(), energy: self.datum.energy };
        let mut out = Self::with_origin(
            format!("{}>>{}", self.id, shift),
            self.grid,
            self.gas,
            self.dt_out,
            datum,
            origin,
            nodes,
        )?;
        out.admissible = self.admissible;
        Ok(out)
    }

    /// `xi1` on `[0, T)`, `xi1(T-)` at `T-`, then `xi2` shifted by `T`.
    pub fn concatenate(&self, junction: T, next: &Self) -> Result<Self, TrajectoryError> {
        if self.grid != next.grid || self.gas != next.gas {
            return Err(TrajectoryError::GridMismatch);
        }
        let left = self.eval(junction, Side::Left)?.clone().at(junction);
        if next.datum.state != left.state || next.datum.energy != self.datum.energy {
            return Err(TrajectoryError::ContinuationIncompatible);
        }
        if !(junction > T::zero()) {
            return Err(TrajectoryError::InvalidShift(junction.as_f64()));
        }
        let mut nodes: Vec<Node<T>> = self.nodes.iter().take_while(|n| n.t() < junction).cloned().collect();
        nodes.push(Node::jump(left, next.nodes[0].right.clone().at(junction)));
        for node in &next.nodes[1..] {
            let t = node.t() + junction;
            nodes.push(Node {
                left: node.left.clone().map(|s| s.at(t)),
                right: node.right.clone().at(t),
            });
        }
        let mut out = Self::with_origin(
            format!("{}|{}@{}", self.id, next.id, junction),
            self.grid,
            self.gas,
            self.dt_out,
            self.datum.clone(),
            self.origin.clone(),
            nodes,
        )?;
        out.admissible = self.admissible && next.admissible;
        Ok(out)
    }

    /// `sigma(t+-) = int (S(t+-) - S0) dx`.
    pub fn entropy_production(&self, t: T, side: Side) -> Result<T, TrajectoryError> {
        let s = &self.eval(t, side)?.state.entropy;
        let s0 = &self.datum.state.entropy;
        let diff: Vec<T> = s.iter().zip(s0).map(|(a, b)| *a - *b).collect();
        Ok(self.grid.integrate(&diff))
    }

    /// Scalar history of a snapshot functional: one-sided values at the
    /// nodes, linear in between (the nodes are treated as samples).
    pub fn history(&self, f: impl Fn(&Snapshot<T>) -> T) -> ScalarHistory<T> {
        let times = self.node_times();
        let left = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| if k == 0 { f(&self.origin) } else { f(n.left()) })
            .collect();
        let right = self.nodes.iter().map(|n| f(&n.right)).collect();
        ScalarHistory::new(times, left, right).expect("node times are strictly increasing")
    }

    /// `t -> int S(t) dx`.
    pub fn entropy_history(&self) -> ScalarHistory<T> {
        self.history(|s| self.grid.integrate(&s.state.entropy))
    }

    /// `t -> sigma(t)`.
    pub fn sigma_history(&self) -> ScalarHistory<T> {
        let s0 = self.grid.integrate(&self.datum.state.entropy);
        self.history(|s| self.grid.integrate(&s.state.entropy) - s0)
    }

    /// Most negative residual of the renormalized entropy inequality
    /// `d/dt int rho Z(s) phi - int rho Z(s) u phi_x >= 0` over node
    /// intervals (time integral by the trapezoid rule) and node jumps.
    /// Vacuum cells contribute zero.
    pub fn renormalized_entropy_residual(&self, z: impl Fn(T) -> T, phi: &[T]) -> T {
        let n = self.grid.cells;
        let dx = self.grid.dx();
        let dphi: Vec<T> = (0..n)
            .map(|i| {
                let lo = phi[i.saturating_sub(1)];
                let hi = phi[(i + 1).min(n - 1)];
                let span = T::of_usize((i + 1).min(n - 1) - i.saturating_sub(1)).max(T::one());
                (hi - lo) / (span * dx)
            })
            .collect();
        let renorm = |s: &Snapshot<T>| -> (T, T) {
            let (mut density, mut flux) = (T::zero(), T::zero());
            for i in 0..n {
                let rho = s.state.rho[i];
                if rho > T::zero() {
                    let q = rho * z(s.state.entropy[i] / rho);
                    density += q * phi[i];
                    flux += q * (s.state.momentum[i] / rho) * dphi[i];
                }
            }
            (density * dx, flux * dx)
        };
        let mut worst = T::zero();
        let mut prev = renorm(&self.origin);
        for (k, node) in self.nodes.iter().enumerate() {
            let l = renorm(node.left());
            if k > 0 {
                let dt = node.t() - self.nodes[k - 1].t();
                let r = (l.0 - prev.0) - dt * (l.1 + prev.1) / T::of(2.0);
                worst = worst.min(r);
            } else {
                worst = worst.min(l.0 - prev.0);
            }
            let r = renorm(&node.right);
            worst = worst.min(r.0 - l.0);
            prev = r;
        }
        worst
    }

    /// Restriction to a grid coarser by `factor`; the Jensen gaps of the
    /// cell averaging go into the kinetic and internal defects, so the
    /// energy ledger is preserved.
    pub fn restrict(&self, factor: usize) -> Result<Self, TrajectoryError> {
        let n = self.grid.cells;
        if factor == 0 || !n.is_multiple_of(factor) {
            return Err(TrajectoryError::GridMismatch);
        }
        let grid = Grid::new(n / factor, self.grid.length)?;
        let gas = self.gas;
        let avg = |v: &[T]| -> Vec<T> {
            v.chunks(factor).map(|c| c.iter().fold(T::zero(), |a, &b| a + b) / T::of_usize(factor)).collect()
        };
        let coarse_state = |s: &FluidState<T>| FluidState { rho: avg(&s.rho), momentum: avg(&s.momentum), entropy: avg(&s.entropy) };
        let coarsen = |snap: &Snapshot<T>| -> Result<Snapshot<T>, TrajectoryError> {
            let state = coarse_state(&snap.state);
            let mut kin = avg(&snap.defects.kinetic);
            let mut int = avg(&snap.defects.internal);
            for j in 0..grid.cells {
                let (mut fine_kin, mut fine_int) = (T::zero(), T::zero());
                for i in j * factor..(j + 1) * factor {
                    let p = snap.state.point(i);
                    fine_kin += gas.kinetic_energy_density(p.rho, p.momentum)?.finite().ok_or(StateError::InfiniteEnergy { cell: i })?;
                    fine_int += gas.internal_energy_density(&p)?.finite().ok_or(StateError::InfiniteEnergy { cell: i })?;
                }
                let p = state.point(j);
                let ck = gas.kinetic_energy_density(p.rho, p.momentum)?.finite().ok_or(StateError::InfiniteEnergy { cell: j })?;
                let ci = gas.internal_energy_density(&p)?.finite().ok_or(StateError::InfiniteEnergy { cell: j })?;
                kin[j] += (fine_kin / T::of_usize(factor) - ck).max(T::zero());
                int[j] += (fine_int / T::of_usize(factor) - ci).max(T::zero());
            }
            Ok(Snapshot { t: snap.t, state, defects: DefectState::from_kinetic_internal(kin, int) })
        };
        let origin = coarsen(&self.origin)?;
        let datum = InitialDatum { state: origin.state.clone(), energy: self.datum.energy };
        let nodes = self
            .nodes
            .iter()
            .map(|node| {
                Ok(Node {
                    left: node.left.as_ref().map(&coarsen).transpose()?,
                    right: coarsen(&node.right)?,
                })
            })
            .collect::<Result<Vec<_>, TrajectoryError>>()?;
        let mut out = Self::with_origin(format!("{}/r{}", self.id, factor), grid, gas, self.dt_out, datum, origin, nodes)?;
        out.admissible = self.admissible;
        Ok(out)
    }
}

/// Sorted union of two node sets up to `horizon`. Times within a few ulps
/// of each other are merged into the latest one, so that evaluating either
/// trajectory there never falls just before one of its own nodes.
pub fn merge_times<T: Real>(a: &[T], b: &[T], horizon: T) -> Vec<T> {
    let snap = T::of(64.0) * T::epsilon() * horizon.abs().max(T::one());
    let mut times: Vec<T> = a.iter().chain(b).copied().filter(|&t| t <= horizon).collect();
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut merged: Vec<T> = Vec::with_capacity(times.len());
    for t in times {
        match merged.last_mut() {
            Some(last) if t - *last <= snap => *last = t,
            _ => merged.push(t),
        }
    }
    merged
}

/// Local-in-time distance
/// `sum_k 2^-k min(1, int_0^min(T,k) |xi1(t) - xi2(t)|_- dt)` over `k >= 1`.
///
/// The time integral is the left-rectangle rule on the union of both node
/// sets (exact for piecewise constant trajectories); node times within a few
/// ulps of each other are merged. Terms with `k > T` all equal the `k = T`
/// term and are summed in closed form.
pub fn l1loc_distance<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    horizon: T,
    weights: &FieldWeights<T>,
) -> Result<T, TrajectoryError> {
    if a.grid != b.grid {
        return Err(TrajectoryError::GridMismatch);
    }
    let horizon = horizon.min(a.horizon()).min(b.horizon());
    let norm = SmoothingNorm::new(a.grid);
    let last_int = horizon.floor().to_usize().unwrap_or(0);
    let integers: Vec<T> = (1..=last_int).map(T::of_usize).collect();
    let mut merged = merge_times(&[a.node_times(), b.node_times(), integers].concat(), &[], horizon);
    merged.retain(|&t| t < horizon);
    merged.push(horizon);
    let snap = T::of(64.0) * T::epsilon() * horizon.max(T::one());

    let mut integral = T::zero();
    let mut at_int = Vec::new();
    let mut next_int = 1usize;
    for w in merged.windows(2) {
        while next_int as f64 <= w[0].as_f64() + snap.as_f64() && next_int <= last_int {
            at_int.push(integral);
            next_int += 1;
        }
        let sa = a.eval(w[0], Side::Right)?;
        let sb = b.eval(w[0], Side::Right)?;
        integral += (w[1] - w[0]) * norm.state_distance(&sa.state, &sb.state, weights);
    }
    while at_int.len() < last_int {
        at_int.push(integral);
    }
    let k_max = horizon.ceil().to_usize().unwrap_or(0).max(1);
    let mut total = T::zero();
    let mut weight = T::one();
    for k in 1..=k_max {
        weight /= T::of(2.0);
        let ik = if k <= last_int { at_int[k - 1] } else { integral };
        total += weight * ik.min(T::one());
    }
    total += weight * integral.min(T::one());
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas() -> GasConstants<f64> {
        GasConstants::diatomic()
    }

    fn constant(cells: usize, s: f64, horizon: f64, steps: usize) -> Trajectory<f64> {
        let grid = Grid::new(cells, 1.0).unwrap();
        let state = FluidState::uniform(cells, 1.0, 0.0, s);
        let datum = InitialDatum::tight(state.clone(), &grid, &gas()).unwrap();
        let nodes = (0..=steps)
            .map(|k| {
                Node::continuous(Snapshot {
                    t: horizon * k as f64 / steps as f64,
                    state: state.clone(),
                    defects: DefectState::zero(cells),
                })
            })
            .collect();
        Trajectory::new("c", grid, gas(), horizon / steps as f64, datum, nodes).unwrap()
    }

    /// S jumps from 0 to 1 at t = 1; the lost internal energy goes to C_int.
    fn jump_fixture() -> Trajectory<f64> {
        let g = gas();
        let grid = Grid::new(4, 1.0).unwrap();
        let s0 = FluidState::uniform(4, 1.0, 0.0, 0.0);
        let s1 = FluidState::uniform(4, 1.0, 0.0, 1.0);
        let e0 = s1.total_energy(&grid, &g).unwrap();
        let datum = InitialDatum::new(s0.clone(), e0, &grid, &g).unwrap();
        let before = datum.snapshot(&grid, &g).unwrap();
        let after = Snapshot { t: 1.0, state: s1, defects: DefectState::zero(4) };
        let nodes = vec![
            Node::continuous(before.clone()),
            Node::jump(before.clone().at(1.0), after.clone()),
            Node::continuous(after.at(2.0)),
        ];
        Trajectory::new("jump", grid, g, 1.0, datum, nodes).unwrap()
    }

    #[test]
    fn eval_sides_at_jump() {
        let tr = jump_fixture();
        assert_eq!(tr.eval(1.0, Side::Left).unwrap().state.entropy[0], 0.0);
        assert_eq!(tr.eval(1.0, Side::Right).unwrap().state.entropy[0], 1.0);
        assert_eq!(tr.eval(0.5, Side::Left).unwrap().state.entropy[0], 0.0);
        assert_eq!(tr.eval(0.0, Side::Left).unwrap().state.entropy, tr.datum().state.entropy);
        assert!(matches!(tr.eval(2.5, Side::Left), Err(TrajectoryError::OutOfHorizon { .. })));
    }

    #[test]
    fn sigma_of_jump_fixture() {
        let tr = jump_fixture();
        assert_eq!(tr.entropy_production(1.0, Side::Right).unwrap(), 1.0);
        assert_eq!(tr.entropy_production(1.0, Side::Left).unwrap(), 0.0);
        let h = tr.sigma_history();
        assert_eq!(h.eval(0.5, Side::Right).unwrap(), 0.0);
        assert_eq!(h.eval(1.5, Side::Right).unwrap(), 1.0);
    }

    #[test]
    fn shift_moves_jump() {
        let tr = jump_fixture();
        let sh = tr.time_shift(0.5).unwrap();
        assert_eq!(sh.eval(0.5, Side::Left).unwrap().state.entropy[0], 0.0);
        assert_eq!(sh.eval(0.5, Side::Right).unwrap().state.entropy[0], 1.0);
        assert!(tr.time_shift(2.0).is_err());
        assert!(tr.time_shift(0.0).is_err());
    }

    #[test]
    fn shift_at_jump_keeps_left_datum() {
        let tr = jump_fixture();
        let sh = tr.time_shift(1.0).unwrap();
        assert_eq!(sh.datum().state.entropy[0], 0.0);
        assert_eq!(sh.eval(0.0, Side::Left).unwrap().state.entropy[0], 0.0);
        assert_eq!(sh.eval(0.0, Side::Right).unwrap().state.entropy[0], 1.0);
        assert_eq!(sh.entropy_production(0.0, Side::Right).unwrap(), 1.0);
    }

    #[test]
    fn self_continuation_at_every_node() {
        let tr = jump_fixture();
        {
            let &t = &1.0;
            let back = tr.concatenate(t, &tr.time_shift(t).unwrap()).unwrap();
            assert!(back.same_evolution(&tr));
        }
        let c = constant(3, 0.0, 2.0, 8);
        for k in 1..8 {
            let t = 0.25 * k as f64;
            assert!(c.concatenate(t, &c.time_shift(t).unwrap()).unwrap().same_evolution(&c));
        }
    }

    #[test]
    fn continuation_rejects_mismatch() {
        let tr = jump_fixture();
        let other = constant(4, 0.5, 1.0, 2);
        assert!(matches!(tr.concatenate(1.0, &other), Err(TrajectoryError::ContinuationIncompatible)));
    }

    #[test]
    fn constructor_rejects_density_jump() {
        let tr = jump_fixture();
        let mut nodes = tr.nodes().to_vec();
        let mut left = nodes[1].right.clone();
        left.state.rho[0] = 2.0;
        nodes[1].left = Some(left);
        let r = Trajectory::new("bad", *tr.grid(), *tr.gas(), 1.0, tr.datum().clone(), nodes);
        assert!(matches!(r, Err(TrajectoryError::Discontinuous { node: 1, field: "rho" })));
    }

    #[test]
    fn distance_of_constant_entropy_offset() {
        let a = constant(8, 1.0, 1.0, 4);
        let b = constant(8, 0.0, 1.0, 4);
        let w = FieldWeights { rho: 1.0, momentum: 1.0, entropy: 0.3 };
        let d = l1loc_distance(&a, &b, 1.0, &w).unwrap();
        // |1|_- = sqrt(L) = 1, so the integrand is w.entropy on [0, 1]
        assert!((d - 0.3).abs() < 1e-12);
        assert_eq!(l1loc_distance(&a, &a, 1.0, &w).unwrap(), 0.0);
        assert_eq!(d, l1loc_distance(&b, &a, 1.0, &w).unwrap());
    }

    #[test]
    fn distance_geometric_weights_on_long_horizon() {
        let a = constant(4, 1.0, 3.0, 6);
        let b = constant(4, 0.0, 3.0, 6);
        let w = FieldWeights { rho: 0.0, momentum: 0.0, entropy: 0.25 };
        // I(s) = s / 4: k=1 -> 1/4, k=2 -> 1/2, k>=3 -> 3/4
        let expected = 0.5 * 0.25 + 0.25 * 0.5 + 0.25 * 0.75;
        assert!((l1loc_distance(&a, &b, 3.0, &w).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn restriction_preserves_energy() {
        let g = gas();
        let grid = Grid::new(8, 1.0).unwrap();
        let state = FluidState {
            rho: vec![1.0, 2.0, 1.5, 0.5, 1.0, 1.0, 3.0, 1.0],
            momentum: vec![0.1, -0.3, 0.0, 0.2, 0.5, 0.5, -1.0, 0.0],
            entropy: vec![0.0, 0.4, 0.2, 0.1, 0.0, 0.3, 0.9, 0.2],
        };
        let datum = InitialDatum::tight(state.clone(), &grid, &g).unwrap();
        let snap = datum.snapshot(&grid, &g).unwrap();
        let tr = Trajectory::new("r", grid, g, 1.0, datum, vec![Node::continuous(snap.clone()), Node::continuous(snap.at(1.0))]).unwrap();
        let coarse = tr.restrict(4).unwrap();
        let e_fine = tr.nodes()[1].right.energy_with_defects(tr.grid(), &g).unwrap();
        let e_coarse = coarse.nodes()[1].right.energy_with_defects(coarse.grid(), &g).unwrap();
        assert!((e_fine - e_coarse).abs() < 1e-12 * e_fine);
        assert!((tr.datum().state.mass(&grid) - coarse.datum().state.mass(coarse.grid())).abs() < 1e-14);
    }

    #[test]
    fn renormalized_residual_constant_z_vanishes() {
        let tr = jump_fixture();
        let phi = vec![1.0, 0.5, 0.25, 2.0];
        assert_eq!(tr.renormalized_entropy_residual(|_| 3.0, &phi), 0.0);
        assert!(tr.renormalized_entropy_residual(|s| s.clamp(-10.0, 10.0), &phi) >= 0.0);
    }
}
