//! Invariant checks on stored trajectories and per-node diagnostics.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;
use crate::trajectory::{Snapshot, Trajectory};

/// Relative tolerance of the energy ledger, times `E0`.
pub const ENERGY_TOLERANCE: f64 = 1e-10;
/// Relative mass drift tolerance, times `M`.
pub const MASS_TOLERANCE: f64 = 1e-13;
/// Entropy monotonicity tolerance, times `max(1, max |int S|)`.
pub const ENTROPY_TOLERANCE: f64 = 1e-10;
/// Entropy floor tolerance, times `max(1, rho)`.
pub const FLOOR_TOLERANCE: f64 = 1e-10;
/// Bound of the clamped renormalization `Z(s) = clamp(s, -K, K)`.
pub const RENORMALIZATION_CLAMP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckSuite {
    All,
    /// Mass and energy ledgers.
    Ledger,
    /// Entropy growth, floor and renormalized inequality.
    Entropy,
    /// Defect nonnegativity and the convective split.
    Defects,
}

impl CheckSuite {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "all" => Some(Self::All),
            "ledger" => Some(Self::Ledger),
            "entropy" => Some(Self::Entropy),
            "defects" => Some(Self::Defects),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst observed value of the checked quantity, scaled like `tol`.
    pub worst: f64,
    pub tol: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, worst: f64, tol: f64, detail: String) -> Self {
        Self { name: name.into(), pass: worst <= tol, worst, tol, detail }
    }
}

/// Origin followed by the left and right value of every node.
fn samples<T: Real>(traj: &Trajectory<T>) -> Vec<&Snapshot<T>> {
    let mut out = vec![traj.origin()];
    for n in traj.nodes() {
        out.push(n.left());
        out.push(&n.right);
    }
    out
}

fn mass_check<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let grid = traj.grid();
    let m0 = traj.datum().state.mass(grid);
    let (t, drift) = samples(traj)
        .iter()
        .map(|s| (s.t, (s.state.mass(grid) - m0).abs()))
        .fold((T::zero(), T::zero()), |best, x| if x.1 > best.1 { x } else { best });
    let scale = m0.abs().max(T::min_positive_value());
    CheckResult::new("mass", (drift / scale).as_f64(), MASS_TOLERANCE, format!("max |M(t) - M0| = {drift:e} at t = {t}"))
}

fn energy_check<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let (grid, gas) = (traj.grid(), traj.gas());
    let e0 = traj.energy_budget();
    let mut worst = T::zero();
    let mut at = T::zero();
    for s in samples(traj) {
        let dev = match s.energy_with_defects(grid, gas) {
            Ok(e) => (e - e0).abs(),
            Err(_) => T::infinity(),
        };
        if !(dev <= worst) {
            worst = dev;
            at = s.t;
        }
    }
    let scale = e0.abs().max(T::min_positive_value());
    CheckResult::new(
        "energy_ledger",
        (worst / scale).as_f64(),
        ENERGY_TOLERANCE,
        format!("max |E + defects - E0| = {worst:e} at t = {at}"),
    )
}

fn entropy_growth_check<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let grid = traj.grid();
    let totals: Vec<(T, T)> = samples(traj).iter().map(|s| (s.t, grid.integrate(&s.state.entropy))).collect();
    let scale = totals.iter().fold(T::one(), |m, &(_, v)| m.max(v.abs()));
    let (mut worst, mut at) = (T::zero(), T::zero());
    for w in totals.windows(2) {
        let drop = w[0].1 - w[1].1;
        if drop > worst {
            worst = drop;
            at = w[1].0;
        }
    }
    CheckResult::new(
        "entropy_monotone",
        (worst / scale).as_f64(),
        ENTROPY_TOLERANCE,
        format!("largest decrease of int S = {worst:e} at t = {at}"),
    )
}

fn floor_check<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let gas = traj.gas();
    let mut worst = T::neg_infinity();
    let mut detail = String::from("no cells");
    for s in samples(traj) {
        let (cell, v) = s.state.entropy_floor_violation(gas);
        let scaled = v / s.state.rho[cell].max(T::one());
        if scaled > worst {
            worst = scaled;
            detail = format!("max (s0 rho - S) / max(1, rho) = {v:e} at t = {}, cell {cell}", s.t);
        }
    }
    CheckResult::new("entropy_floor", worst.as_f64(), FLOOR_TOLERANCE, detail)
}

fn renormalized_check<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let k = T::of(RENORMALIZATION_CLAMP);
    let phi = vec![T::one(); traj.grid().cells];
    let residual = traj.renormalized_entropy_residual(|s| s.max(-k).min(k), &phi);
    let scale = traj.datum().state.mass(traj.grid()).max(T::one()) * k;
    CheckResult::new(
        "renormalized_entropy",
        (-residual / scale).as_f64(),
        ENTROPY_TOLERANCE,
        format!("most negative residual {residual:e}"),
    )
}

fn defect_check<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let mut worst = T::zero();
    let mut detail = String::from("defects nonnegative, split exact");
    for s in samples(traj) {
        let d = &s.defects;
        for i in 0..d.kinetic.len() {
            let negative = [d.kinetic[i], d.internal[i], d.convective_plus[i], d.convective_minus[i]]
                .iter()
                .fold(T::zero(), |m, &v| m.max(-v));
            let split = ((d.convective_plus[i] + d.convective_minus[i]) / T::of(2.0) - d.kinetic[i]).abs();
            let v = negative.max(split);
            if v > worst {
                worst = v;
                detail = format!("violation {v:e} at t = {}, cell {i}", s.t);
            }
        }
    }
    CheckResult::new("defects", worst.as_f64(), 1e-12, detail)
}

/// Runs the invariant checks of `suite`. The entropy checks are expected to
/// fail on trajectories flagged non-admissible.
pub fn check_trajectory<T: Real>(traj: &Trajectory<T>, suite: CheckSuite) -> Vec<CheckResult> {
    let ledger = matches!(suite, CheckSuite::All | CheckSuite::Ledger);
    let entropy = matches!(suite, CheckSuite::All | CheckSuite::Entropy);
    let defects = matches!(suite, CheckSuite::All | CheckSuite::Defects);
    let mut out = Vec::new();
    if ledger {
        out.push(mass_check(traj));
        out.push(energy_check(traj));
    }
    if entropy {
        out.push(entropy_growth_check(traj));
        out.push(floor_check(traj));
        out.push(renormalized_check(traj));
    }
    if defects {
        out.push(defect_check(traj));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    pub defect_total: T,
    pub total_entropy: T,
    pub sigma: T,
}

pub const DIAGNOSTICS_HEADER: &str = "t,mass,energy,defect_total,total_entropy,sigma";

impl<T: Real> DiagnosticsRow<T> {
    pub fn csv(&self) -> String {
        format!("{:e},{:e},{:e},{:e},{:e},{:e}", self.t, self.mass, self.energy, self.defect_total, self.total_entropy, self.sigma)
    }
}

/// One row per node, from the right value. Energies of infinite cells are
/// reported as `inf`.
pub fn diagnostics<T: Real>(traj: &Trajectory<T>) -> Vec<DiagnosticsRow<T>> {
    let (grid, gas) = (traj.grid(), traj.gas());
    let s0 = traj.datum().state.total_entropy(grid);
    traj.nodes()
        .iter()
        .map(|n| {
            let s = &n.right;
            let total_entropy = s.state.total_entropy(grid);
            DiagnosticsRow {
                t: s.t,
                mass: s.state.mass(grid),
                energy: s.state.total_energy(grid, gas).unwrap_or_else(|_| T::infinity()),
                defect_total: s.defects.total(grid),
                total_entropy,
                sigma: total_entropy - s0,
            }
        })
        .collect()
}

pub fn diagnostics_csv<T: Real>(rows: &[DiagnosticsRow<T>]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}
