#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Dissipative solutions of the one-dimensional complete Euler system and
//! semiflow selection among them.
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! `*64` aliases fix it to `f64`.

pub mod check;
pub mod equilibrium;
pub mod fixtures;
pub mod history;
pub mod io;
pub mod scalar;
pub mod selection;
pub mod solver;
pub mod state;
pub mod thermo;
pub mod trajectory;

pub use equilibrium::{equilibrium_state, EquilibriumState};
pub use history::{LaplaceValue, ScalarHistory};
pub use scalar::{Extended, Real};
pub use selection::{sieve_select, SelectionParams};
pub use solver::{SchemeConfig, SchemeKind, SolutionSet};
pub use state::{DefectState, FieldWeights, FluidState, Grid, SmoothingNorm};
pub use thermo::{GasConstants, ThermoPoint};
pub use trajectory::{l1loc_distance, merge_times, InitialDatum, Node, Side, Snapshot, Trajectory};

pub type GasConstants64 = GasConstants<f64>;
pub type FluidState64 = FluidState<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type SolutionSet64 = SolutionSet<f64>;
pub type SelectionParams64 = SelectionParams<f64>;
pub type SchemeConfig64 = SchemeConfig<f64>;
pub type EquilibriumState64 = EquilibriumState<f64>;
pub type Trajectory32 = Trajectory<f32>;
