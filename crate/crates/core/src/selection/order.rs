//! Entropy-production order and the Dafermos orders, evaluated at node
//! times only.

use serde::{Deserialize, Serialize};

use crate::history::ScalarHistory;
use crate::scalar::Real;
use crate::trajectory::{merge_times, Side, Trajectory};

use super::SelectionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Succeeds,
    Precedes,
    Equivalent,
    Incomparable,
}

impl Relation {
    fn from_directions(forward: bool, backward: bool) -> Self {
        match (forward, backward) {
            (true, true) => Relation::Equivalent,
            (true, false) => Relation::Succeeds,
            (false, true) => Relation::Precedes,
            (false, false) => Relation::Incomparable,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Relation::Succeeds => Relation::Precedes,
            Relation::Precedes => Relation::Succeeds,
            r => r,
        }
    }
}

/// Verdict of comparing a first argument against a second.
///
/// For `order_sigma` the witness is the first time of strict dominance, or
/// the sample times bracketing the first sign change when incomparable. For the Dafermos orders it is
/// `tau` followed by the window times inspected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict<T> {
    pub relation: Relation,
    pub witness: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParams<T> {
    pub tol: T,
    /// Nodes inspected after the agreement time `tau`.
    pub window: usize,
    /// `order_f` requires dominance somewhere in every block of this many nodes.
    pub block: usize,
}

impl<T: Real> Default for OrderParams<T> {
    fn default() -> Self {
        Self { tol: T::of(1e-10), window: 8, block: 2 }
    }
}

impl<T: Real> OrderParams<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }
}

fn check_pair<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<(Vec<T>, T), SelectionError> {
    if a.grid() != b.grid() || a.datum() != b.datum() {
        return Err(SelectionError::DatumMismatch);
    }
    let horizon = a.horizon().min(b.horizon());
    let mut times = merge_times(&a.node_times(), &b.node_times(), horizon);
    if times.last() != Some(&horizon) {
        times.push(horizon);
    }
    Ok((times, horizon))
}

/// `(t0+), (t1-), (t1+), ...`
fn sample_points<T: Real>(times: &[T]) -> Vec<(T, Side)> {
    let mut pts = vec![(times[0], Side::Right)];
    for &t in &times[1..] {
        pts.push((t, Side::Left));
        pts.push((t, Side::Right));
    }
    pts
}

fn sigma_verdict<T: Real>(pts: &[(T, Side)], diffs: &[T], tol: T) -> OrderVerdict<T> {
    let forward = diffs.iter().all(|&d| d >= -tol);
    let backward = diffs.iter().all(|&d| d <= tol);
    let relation = Relation::from_directions(forward, backward);
    let witness = match relation {
        Relation::Equivalent => vec![],
        Relation::Succeeds => diffs.iter().position(|&d| d > tol).map(|i| vec![pts[i].0]).unwrap_or_default(),
        Relation::Precedes => diffs.iter().position(|&d| d < -tol).map(|i| vec![pts[i].0]).unwrap_or_default(),
        Relation::Incomparable => {
            let first = diffs.iter().position(|&d| d.abs() > tol).unwrap();
            let sign = diffs[first] > T::zero();
            let flip = diffs[first..].iter().position(|&d| d.abs() > tol && (d > T::zero()) != sign).unwrap() + first;
            vec![pts[flip - 1].0, pts[flip].0]
        }
    };
    OrderVerdict { relation, witness }
}

/// `sigma1(t+-) >= sigma2(t+-)` at every node time and side.
pub fn order_sigma<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>, tol: T) -> Result<OrderVerdict<T>, SelectionError> {
    let (times, _) = check_pair(a, b)?;
    let pts = sample_points(&times);
    let diffs = pts
        .iter()
        .map(|&(t, side)| Ok(a.entropy_production(t, side)? - b.entropy_production(t, side)?))
        .collect::<Result<Vec<T>, SelectionError>>()?;
    Ok(sigma_verdict(&pts, &diffs, tol))
}

/// `(tau, window times, entropy differences)`.
type Window<T> = (T, Vec<T>, Vec<T>);

/// Agreement time `tau` and the right-value entropy differences on the
/// window after it; `None` when the two agree at every sample.
fn window<T: Real>(
    times: &[T],
    agree: impl Fn(T, Side) -> bool,
    right_diff: impl Fn(T) -> T,
    len: usize,
) -> Option<Window<T>> {
    let pts = sample_points(times);
    let i = pts.iter().position(|&(t, side)| !agree(t, side))?;
    let (t_i, side) = pts[i];
    let tau = if side == Side::Right { t_i } else { pts[i - 1].0 };
    let start = times.iter().position(|&t| t == t_i).unwrap();
    let wt: Vec<T> = times[start..].iter().copied().take(len.max(1)).collect();
    let diffs = wt.iter().map(|&t| right_diff(t)).collect();
    Some((tau, wt, diffs))
}

fn dafermos_verdict<T: Real>(found: Option<Window<T>>, tol: T, block: Option<usize>) -> OrderVerdict<T> {
    let Some((tau, times, diffs)) = found else {
        return OrderVerdict { relation: Relation::Equivalent, witness: vec![] };
    };
    let (forward, backward) = match block {
        None => (diffs.iter().all(|&d| d >= -tol), diffs.iter().all(|&d| d <= tol)),
        Some(b) => {
            let chunks: Vec<&[T]> = diffs.chunks(b.max(1)).collect();
            (
                chunks.iter().all(|c| c.iter().any(|&d| d >= -tol)),
                chunks.iter().all(|c| c.iter().any(|&d| d <= tol)),
            )
        }
    };
    let mut witness = vec![tau];
    witness.extend(times);
    OrderVerdict { relation: Relation::from_directions(forward, backward), witness }
}

fn trajectory_window<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    params: &OrderParams<T>,
) -> Result<Option<Window<T>>, SelectionError> {
    let (times, _) = check_pair(a, b)?;
    let grid = *a.grid();
    let agree = |t: T, side: Side| {
        let sa = &a.eval(t, side).expect("t within horizon").state;
        let sb = &b.eval(t, side).expect("t within horizon").state;
        sa.max_abs_diff(sb) <= params.tol
    };
    let diff = |t: T| {
        let sa = &a.eval(t, Side::Right).expect("t within horizon").state;
        let sb = &b.eval(t, Side::Right).expect("t within horizon").state;
        grid.integrate(&sa.entropy) - grid.integrate(&sb.entropy)
    };
    Ok(window(&times, agree, diff, params.window))
}

/// Agreement of full states up to `tau`, then `int S1(t+) >= int S2(t+)` on
/// the next `window` nodes.
pub fn order_dafermos<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>, params: &OrderParams<T>) -> Result<OrderVerdict<T>, SelectionError> {
    Ok(dafermos_verdict(trajectory_window(a, b, params)?, params.tol, None))
}

/// Weak variant: dominance at some node of every block of the window, so
/// that dominance times accumulate at `tau`.
pub fn order_f<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>, params: &OrderParams<T>) -> Result<OrderVerdict<T>, SelectionError> {
    Ok(dafermos_verdict(trajectory_window(a, b, params)?, params.tol, Some(params.block)))
}

fn scalar_window<T: Real>(f: &ScalarHistory<T>, g: &ScalarHistory<T>, params: &OrderParams<T>) -> Option<Window<T>> {
    let horizon = f.horizon().min(g.horizon());
    let mut times = merge_times(f.times(), g.times(), horizon);
    if times.last() != Some(&horizon) {
        times.push(horizon);
    }
    let at = |h: &ScalarHistory<T>, t, side| h.eval(t, side).expect("t within horizon");
    let agree = |t: T, side: Side| (at(f, t, side) - at(g, t, side)).abs() <= params.tol;
    let diff = |t: T| at(f, t, Side::Right) - at(g, t, Side::Right);
    window(&times, agree, diff, params.window)
}

/// [`order_dafermos`] for scalar entropy histories.
pub fn order_dafermos_scalar<T: Real>(f: &ScalarHistory<T>, g: &ScalarHistory<T>, params: &OrderParams<T>) -> OrderVerdict<T> {
    dafermos_verdict(scalar_window(f, g, params), params.tol, None)
}

/// [`order_f`] for scalar entropy histories.
pub fn order_f_scalar<T: Real>(f: &ScalarHistory<T>, g: &ScalarHistory<T>, params: &OrderParams<T>) -> OrderVerdict<T> {
    dafermos_verdict(scalar_window(f, g, params), params.tol, Some(params.block))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::EntropyFixture;
    use crate::thermo::GasConstants;

    fn fx() -> (EntropyFixture<f64>, GasConstants<f64>) {
        (EntropyFixture { dt: 0.1, ..Default::default() }, GasConstants::diatomic())
    }

    fn oscillating() -> (Trajectory<f64>, Trajectory<f64>) {
        let (fx, g) = fx();
        let flat = vec![0.0; 21];
        let zigzag: Vec<f64> = (0..21).map(|k| if k == 0 { 0.0 } else if k % 2 == 1 { 0.1 } else { -0.1 }).collect();
        (fx.continuous("flat", &flat, &g).unwrap(), fx.continuous("zigzag", &zigzag, &g).unwrap())
    }

    #[test]
    fn identical_is_equivalent() {
        let (fx, g) = fx();
        let s: Vec<f64> = (0..11).map(|k| 0.05 * k as f64).collect();
        let a = fx.continuous("a", &s, &g).unwrap();
        let b = fx.continuous("b", &s, &g).unwrap();
        let p = OrderParams::default();
        assert_eq!(order_sigma(&a, &b, 1e-12).unwrap().relation, Relation::Equivalent);
        assert_eq!(order_dafermos(&a, &b, &p).unwrap().relation, Relation::Equivalent);
        assert_eq!(order_f(&a, &b, &p).unwrap().relation, Relation::Equivalent);
    }

    #[test]
    fn crossing_sigma_is_incomparable_near_one() {
        let (fx, g) = fx();
        let lin: Vec<f64> = (0..21).map(|k| 0.1 * k as f64).collect();
        let quad: Vec<f64> = lin.iter().map(|t| t * t / 4.0).collect();
        let lin: Vec<f64> = lin.iter().map(|t| t / 4.0).collect();
        let a = fx.continuous("a", &lin, &g).unwrap();
        let b = fx.continuous("b", &quad, &g).unwrap();
        let v = order_sigma(&a, &b, 1e-12).unwrap();
        assert_eq!(v.relation, Relation::Incomparable);
        assert!((v.witness[0] - 1.0).abs() < 1e-9, "{:?}", v.witness);
        assert!(v.witness[1] > 1.0 && v.witness[1] < 1.15);
    }

    #[test]
    fn constant_one_dominates_constant_zero() {
        let (fx, g) = fx();
        let one = fx.build("one", &[0.0; 11], &[1.0; 11], &g).unwrap();
        let zero = fx.continuous("zero", &[0.0; 11], &g).unwrap();
        let p = OrderParams::default();
        let d = order_dafermos(&one, &zero, &p).unwrap();
        assert_eq!(d.relation, Relation::Succeeds);
        assert_eq!(d.witness[0], 0.0);
        assert_eq!(order_dafermos(&zero, &one, &p).unwrap().relation, Relation::Precedes);
        assert_eq!(order_f(&one, &zero, &p).unwrap().relation, Relation::Succeeds);
        assert_eq!(order_sigma(&one, &zero, 1e-12).unwrap().relation, Relation::Succeeds);
    }

    #[test]
    fn oscillating_pair() {
        let (a, b) = oscillating();
        let p = OrderParams::default();
        assert_eq!(order_dafermos(&a, &b, &p).unwrap().relation, Relation::Incomparable);
        assert_eq!(order_dafermos(&b, &a, &p).unwrap().relation, Relation::Incomparable);
        assert_eq!(order_f(&a, &b, &p).unwrap().relation, Relation::Equivalent);
        assert_eq!(order_f(&b, &a, &p).unwrap().relation, Relation::Equivalent);
        assert_eq!(order_sigma(&a, &b, 1e-12).unwrap().relation, Relation::Incomparable);
    }

    #[test]
    fn datum_mismatch_is_rejected() {
        let (fx, g) = fx();
        let a = fx.continuous("a", &[0.0; 5], &g).unwrap();
        let other = EntropyFixture { s_budget: 3.0, ..fx };
        let b = other.continuous("b", &[0.0; 5], &g).unwrap();
        assert_eq!(order_sigma(&a, &b, 0.0), Err(SelectionError::DatumMismatch));
    }

    #[test]
    fn scalar_variants_match_trajectory_variants() {
        let (a, b) = oscillating();
        let p = OrderParams::default();
        let (fa, fb) = (a.entropy_history(), b.entropy_history());
        assert_eq!(order_f_scalar(&fa, &fb, &p).relation, Relation::Equivalent);
        assert_eq!(order_dafermos_scalar(&fa, &fb, &p).relation, Relation::Incomparable);
    }
}
