//! Finite families of candidate trajectories sharing one datum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::state::Grid;
use crate::thermo::GasConstants;
use crate::trajectory::{InitialDatum, Node, Snapshot, Trajectory};

use super::riemann::{riemann_exact, riemann_expansion_shock, RiemannProblem, RiemannSolution};
use super::{simulate, SchemeConfig, SolverError};

pub const EXACT_PREFIX: &str = "riemann-exact";
pub const EXPANSION_SHOCK_PREFIX: &str = "riemann-expansion-shock";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("solution set is empty")]
    Empty,
    #[error("candidate `{0}` does not share the datum of the set")]
    DatumMismatch(String),
    #[error("duplicate candidate id `{0}`")]
    DuplicateId(String),
}

/// Nonempty family of trajectories from one datum, kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet<T> {
    members: Vec<Trajectory<T>>,
    /// `(id, error)` of candidates that could not be generated.
    pub failures: Vec<(String, String)>,
}

impl<T: Real> SolutionSet<T> {
    pub fn new(mut members: Vec<Trajectory<T>>) -> Result<Self, SetError> {
        let first = members.first().ok_or(SetError::Empty)?;
        let (grid, gas, datum) = (*first.grid(), *first.gas(), first.datum().clone());
        for m in &members {
            if *m.grid() != grid || *m.gas() != gas || *m.datum() != datum {
                return Err(SetError::DatumMismatch(m.id().to_string()));
            }
        }
        members.sort_by(|a, b| a.id().cmp(b.id()));
        if let Some(w) = members.windows(2).find(|w| w[0].id() == w[1].id()) {
            return Err(SetError::DuplicateId(w[0].id().to_string()));
        }
        Ok(Self { members, failures: Vec::new() })
    }

    pub fn members(&self) -> &[Trajectory<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn datum(&self) -> &InitialDatum<T> {
        self.members[0].datum()
    }

    pub fn get(&self, id: &str) -> Option<&Trajectory<T>> {
        self.members.iter().find(|m| m.id() == id)
    }

    /// Largest time covered by every member.
    pub fn common_horizon(&self) -> T {
        self.members.iter().map(Trajectory::horizon).fold(T::infinity(), T::min)
    }

    pub fn push(&mut self, member: Trajectory<T>) -> Result<(), SetError> {
        let mut all = std::mem::take(&mut self.members);
        all.push(member);
        let failures = std::mem::take(&mut self.failures);
        *self = Self::new(all)?;
        self.failures = failures;
        Ok(())
    }
}

fn run_suite<T: Real>(datum: &InitialDatum<T>, suite: &[SchemeConfig<T>], gas: &GasConstants<T>) -> Vec<(String, Result<Trajectory<T>, SolverError>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = suite
            .iter()
            .map(|cfg| scope.spawn(move || (cfg.id(), simulate(datum, cfg, gas))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    })
}

fn collect<T: Real>(results: Vec<(String, Result<Trajectory<T>, SolverError>)>) -> Result<SolutionSet<T>, SolverError> {
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(t) => ok.push(t),
            Err(e) => failures.push((id, e.to_string())),
        }
    }
    if ok.is_empty() {
        let msg = failures.iter().map(|(id, e)| format!("{id}: {e}")).collect::<Vec<_>>().join("; ");
        return Err(SolverError::AllFailed(msg));
    }
    let mut set = SolutionSet::new(ok)?;
    set.failures = failures;
    Ok(set)
}

/// Runs every scheme of `suite` from `datum` concurrently.
pub fn generate_candidates<T: Real>(
    datum: &InitialDatum<T>,
    suite: &[SchemeConfig<T>],
    gas: &GasConstants<T>,
) -> Result<SolutionSet<T>, SolverError> {
    if suite.is_empty() {
        return Err(SolverError::EmptySuite);
    }
    collect(run_suite(datum, suite, gas))
}

/// Trajectory of cell averages of a self-similar solution at `k dt_out`.
pub fn riemann_trajectory<T: Real>(
    problem: &RiemannProblem<T>,
    solution: &RiemannSolution<T>,
    gas: &GasConstants<T>,
    t_end: T,
    dt_out: T,
    id: impl Into<String>,
) -> Result<Trajectory<T>, SolverError> {
    problem.check_horizon(solution, t_end)?;
    let datum = problem.initial_datum(gas)?;
    let steps = (t_end / dt_out).round().to_usize().unwrap_or(0);
    let mut nodes = vec![Node::continuous(datum.snapshot(&problem.grid, gas)?)];
    for k in 1..=steps {
        let t = T::of_usize(k) * dt_out;
        let (state, defects) = problem.cell_averages(solution, t, gas)?;
        nodes.push(Node::continuous(Snapshot { t, state, defects }));
    }
    Ok(Trajectory::new(id, problem.grid, *gas, dt_out, datum, nodes)?)
}

fn closed_form_id<T: Real>(prefix: &str, grid: &Grid<T>) -> String {
    format!("{prefix}-n{}", grid.cells)
}

/// Scheme candidates plus the entropy solution and, when the datum has a
/// rarefaction, the expansion-shock weak solution. Closed-form members use
/// the horizon and cadence of the first suite entry.
pub fn generate_riemann_candidates<T: Real>(
    problem: &RiemannProblem<T>,
    suite: &[SchemeConfig<T>],
    gas: &GasConstants<T>,
) -> Result<SolutionSet<T>, SolverError> {
    let first = suite.first().ok_or(SolverError::EmptySuite)?;
    let datum = problem.initial_datum(gas)?;
    let mut results = run_suite(&datum, suite, gas);
    let (t_end, dt_out) = (first.t_end, first.dt_out);
    let exact_id = closed_form_id(EXACT_PREFIX, &problem.grid);
    results.push((
        exact_id.clone(),
        riemann_exact(&problem.datum, gas)
            .map_err(SolverError::from)
            .and_then(|s| riemann_trajectory(problem, &s, gas, t_end, dt_out, exact_id)),
    ));
    let shock_id = closed_form_id(EXPANSION_SHOCK_PREFIX, &problem.grid);
    results.push((
        shock_id.clone(),
        riemann_expansion_shock(&problem.datum, gas)
            .map_err(SolverError::from)
            .and_then(|s| riemann_trajectory(problem, &s, gas, t_end, dt_out, shock_id))
            .map(Trajectory::non_admissible),
    ));
    collect(results)
}
