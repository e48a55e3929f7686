//! Semiflow selection by sequential minimization of Laplace functionals.
//!
//! Stage 0 minimizes `int exp(-lambda0 t) alpha(int S dx) dt`; since `alpha`
//! is strictly decreasing this prefers the largest entropy. Later stages
//! break the remaining ties with bounded moment functionals at
//! `lambda_n = lambda0 + n zeta`, and the last resort is the smallest id.

pub mod audit;
pub mod order;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::{HistoryError, LaplaceValue};
use crate::scalar::Real;
use crate::solver::{SetError, SolutionSet, SolverError};
use crate::state::Grid;
use crate::trajectory::{Snapshot, Trajectory, TrajectoryError};

pub use audit::{lemma10_audit, semiflow_audit, separation_audit, Lemma10Report, PairVerdict, SemiflowReport, Separation};
pub use order::{order_dafermos, order_dafermos_scalar, order_f, order_f_scalar, order_sigma, OrderParams, OrderVerdict, Relation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("cannot select from an empty set")]
    Empty,
    #[error("trajectories do not share a datum")]
    DatumMismatch,
    #[error("invalid selection parameters: {0}")]
    InvalidParams(String),
    #[error("Laplace hypothesis fails: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// Bounded strictly decreasing reparametrization of the total entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    /// `-tanh(x / scale)`
    Tanh,
    /// `-(2 / pi) atan(x / scale)`
    Atan,
}

impl Alpha {
    pub fn apply<T: Real>(&self, x: T, scale: T) -> T {
        let z = x / scale;
        match self {
            Alpha::Tanh => -z.tanh(),
            Alpha::Atan => -z.atan() * T::of(2.0) / T::PI(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Rho,
    Momentum,
    Entropy,
}

/// Bounded functional of a snapshot, `|beta| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Beta {
    /// `alpha(int S dx)`
    Entropy,
    /// `tanh(int f cos(j pi x / L) dx)`
    Moment { field: Field, mode: usize },
}

impl Beta {
    pub fn evaluate<T: Real>(&self, snap: &Snapshot<T>, grid: &Grid<T>, params: &SelectionParams<T>) -> T {
        match *self {
            Beta::Entropy => beta_entropy(snap, grid, params),
            Beta::Moment { field, mode } => {
                let values = match field {
                    Field::Rho => &snap.state.rho,
                    Field::Momentum => &snap.state.momentum,
                    Field::Entropy => &snap.state.entropy,
                };
                let k = T::of_usize(mode) * T::PI() / grid.length;
                let sum = values
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (i, &v)| acc + v * (k * grid.center(i)).cos());
                (sum * grid.dx()).tanh()
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Beta::Entropy => "alpha(int S)".to_string(),
            Beta::Moment { field, mode } => format!("tanh(int {field:?} cos{mode})"),
        }
    }
}

/// `alpha(int S dx)` for the configured `alpha` and scale.
pub fn beta_entropy<T: Real>(snap: &Snapshot<T>, grid: &Grid<T>, params: &SelectionParams<T>) -> T {
    params.alpha.apply(grid.integrate(&snap.state.entropy), params.x_scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams<T> {
    pub lambda0: T,
    pub zeta: T,
    pub n_funcs: usize,
    pub alpha: Alpha,
    pub x_scale: T,
    pub beta_family: Vec<Beta>,
    /// Ties are declared within `tie_tol / lambda` beyond the tail bounds.
    pub tie_tol: T,
}

impl<T: Real> Default for SelectionParams<T> {
    fn default() -> Self {
        Self {
            lambda0: T::one(),
            zeta: T::one(),
            n_funcs: 8,
            alpha: Alpha::Tanh,
            x_scale: T::one(),
            beta_family: default_beta_family(3),
            tie_tol: T::of(1e-9),
        }
    }
}

/// Cosine moments of `rho`, `m`, `S` for modes `0..modes`.
pub fn default_beta_family(modes: usize) -> Vec<Beta> {
    (0..modes)
        .flat_map(|mode| [Field::Rho, Field::Momentum, Field::Entropy].map(|field| Beta::Moment { field, mode }))
        .collect()
}

impl<T: Real> SelectionParams<T> {
    pub fn with_lambda0(mut self, lambda0: T) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn lambda(&self, n: usize) -> T {
        self.lambda0 + T::of_usize(n) * self.zeta
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        let bad = |m: &str| Err(SelectionError::InvalidParams(m.into()));
        if !(self.lambda0 > T::zero()) {
            return bad("lambda0 must be positive");
        }
        if !(self.zeta > T::zero()) {
            return bad("zeta must be positive");
        }
        if !(self.x_scale > T::zero()) {
            return bad("x_scale must be positive");
        }
        if !(self.tie_tol >= T::zero()) {
            return bad("tie_tol must be nonnegative");
        }
        if self.n_funcs > 0 && self.beta_family.is_empty() {
            return bad("beta_family is empty");
        }
        Ok(())
    }

    /// Functional used at stage `n`.
    pub fn stage_beta(&self, n: usize) -> Beta {
        if n == 0 {
            Beta::Entropy
        } else {
            self.beta_family[(n - 1) % self.beta_family.len()]
        }
    }
}

/// Certified `int_0^horizon exp(-lambda t) beta(traj(t)) dt` with `|beta| <= 1`.
pub fn laplace_functional<T: Real>(
    traj: &Trajectory<T>,
    lambda: T,
    beta: impl Fn(&Snapshot<T>) -> T,
    horizon: T,
) -> Result<LaplaceValue<T>, SelectionError> {
    Ok(traj.history(beta).laplace(lambda, T::one(), horizon)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog<T> {
    pub stage: usize,
    pub lambda: T,
    pub functional: String,
    pub values: Vec<(String, LaplaceValue<T>)>,
    pub survivors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport<T> {
    pub chosen: String,
    pub horizon: T,
    pub stages: Vec<StageLog<T>>,
    /// Survivors of the last stage were separated only by their ids.
    pub decided_by_id: bool,
}

/// Runs the sieve on `set` over its common horizon.
pub fn sieve_select<'a, T: Real>(
    set: &'a SolutionSet<T>,
    params: &SelectionParams<T>,
) -> Result<(&'a Trajectory<T>, SelectionReport<T>), SelectionError> {
    params.validate()?;
    if set.is_empty() {
        return Err(SelectionError::Empty);
    }
    let horizon = set.common_horizon();
    let members = set.members();
    let mut survivors: Vec<usize> = (0..members.len()).collect();
    let mut stages = Vec::new();
    for n in 0..=params.n_funcs {
        let lambda = params.lambda(n);
        let beta = params.stage_beta(n);
        let values: Vec<LaplaceValue<T>> = survivors
            .iter()
            .map(|&i| {
                let tr = &members[i];
                laplace_functional(tr, lambda, |s| beta.evaluate(s, tr.grid(), params), horizon)
            })
            .collect::<Result<_, _>>()?;
        let best = (0..values.len())
            .min_by(|&a, &b| values[a].value.partial_cmp(&values[b].value).unwrap())
            .expect("nonempty survivors");
        let slack = params.tie_tol / lambda;
        let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k].overlaps(&values[best], slack)).collect();
        stages.push(StageLog {
            stage: n,
            lambda,
            functional: beta.label(),
            values: survivors.iter().zip(&values).map(|(&i, v)| (members[i].id().to_string(), *v)).collect(),
            survivors: kept.iter().map(|&k| members[survivors[k]].id().to_string()).collect(),
        });
        survivors = kept.into_iter().map(|k| survivors[k]).collect();
        if survivors.len() == 1 {
            break;
        }
    }
    // members are sorted by id
    let chosen = survivors[0];
    let report = SelectionReport {
        chosen: members[chosen].id().to_string(),
        horizon,
        decided_by_id: survivors.len() > 1,
        stages,
    };
    Ok((&members[chosen], report))
}
