//! Audits of the selection machinery: the Laplace-maximality dichotomy,
//! separation by arithmetic Laplace sequences, and the semigroup property.

use serde::{Deserialize, Serialize};

use crate::history::ScalarHistory;
use crate::scalar::Real;
use crate::solver::{generate_candidates, SchemeConfig};
use crate::state::FieldWeights;
use crate::thermo::GasConstants;
use crate::trajectory::{l1loc_distance, InitialDatum, Side};

use super::order::{order_dafermos_scalar, order_f_scalar, OrderParams, Relation};
use super::{sieve_select, SelectionError, SelectionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    /// `F` strictly Dafermos-dominates `G`.
    Dominates,
    /// `F ~_F G`.
    FEquivalent,
    /// Neither case; the dichotomy fails for this pair.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma10Report<T> {
    /// `lambda_n L[F](lambda_n) >= lambda_n L[G](lambda_n)` for all `G`, `n`,
    /// up to the certified tails.
    pub hypothesis_holds: bool,
    /// `(id, n, lambda_n L[G] - lambda_n L[F])` where the hypothesis fails.
    pub hypothesis_failures: Vec<(String, usize, T)>,
    pub pairs: Vec<(String, PairVerdict)>,
    /// No member Dafermos-dominates `F` and every pair satisfies the dichotomy.
    pub maximal: bool,
}

/// Checks that a Laplace-maximal entropy history `F` either strictly
/// Dafermos-dominates each other member or is `~_F` equivalent to it.
///
/// A failing hypothesis is reported, not raised; pair verdicts are then
/// still computed but `maximal` is false.
pub fn lemma10_audit<T: Real>(
    family: &[(String, ScalarHistory<T>)],
    f_index: usize,
    params: &SelectionParams<T>,
    orders: &OrderParams<T>,
) -> Result<Lemma10Report<T>, SelectionError> {
    params.validate()?;
    let (f_id, f) = family.get(f_index).ok_or(SelectionError::Empty)?;
    let horizon = family.iter().map(|(_, h)| h.horizon()).fold(T::infinity(), T::min);
    let bound = family.iter().map(|(_, h)| h.sup_norm()).fold(T::zero(), T::max);
    let mut failures = Vec::new();
    let mut pairs = Vec::new();
    for (g_id, g) in family.iter() {
        if g_id == f_id {
            continue;
        }
        for n in 0..=params.n_funcs {
            let lambda = params.lambda(n);
            let lf = f.laplace(lambda, bound, horizon)?;
            let lg = g.laplace(lambda, bound, horizon)?;
            let excess = lambda * (lg.value - lf.value);
            if excess > lambda * (lf.tail + lg.tail + params.tie_tol / lambda) {
                failures.push((g_id.clone(), n, excess));
            }
        }
        let verdict = if order_dafermos_scalar(f, g, orders).relation == Relation::Succeeds {
            PairVerdict::Dominates
        } else if order_f_scalar(f, g, orders).relation == Relation::Equivalent {
            PairVerdict::FEquivalent
        } else {
            PairVerdict::Violation
        };
        pairs.push((g_id.clone(), verdict));
    }
    let dominated = family
        .iter()
        .any(|(g_id, g)| g_id != f_id && order_dafermos_scalar(g, f, orders).relation == Relation::Succeeds);
    let hypothesis_holds = failures.is_empty();
    let maximal = hypothesis_holds && !dominated && pairs.iter().all(|(_, v)| *v != PairVerdict::Violation);
    Ok(Lemma10Report { hypothesis_holds, hypothesis_failures: failures, pairs, maximal })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Separation<T> {
    Distinguished { n: usize, lambda: T, value: T, certificate: T },
    Indistinguished,
}

/// Smallest `n <= stages` with `|L[f1 - f2](lambda_n)|` above its tail
/// certificate plus `quad_tol`.
pub fn separation_audit<T: Real>(
    f1: &ScalarHistory<T>,
    f2: &ScalarHistory<T>,
    params: &SelectionParams<T>,
    stages: usize,
    quad_tol: T,
) -> Result<Separation<T>, SelectionError> {
    params.validate()?;
    let diff = f1.zip_with(f2, |a, b| a - b);
    let horizon = diff.horizon();
    let bound = diff.sup_norm();
    for n in 0..=stages {
        let lambda = params.lambda(n);
        let v = diff.laplace(lambda, bound, horizon)?;
        let certificate = v.tail + quad_tol;
        if v.value.abs() > certificate {
            return Ok(Separation::Distinguished { n, lambda, value: v.value, certificate });
        }
    }
    Ok(Separation::Indistinguished)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiflowReport<T> {
    pub t1: T,
    pub t2: T,
    pub first_selection: String,
    pub second_selection: String,
    pub distance: T,
    pub tol: T,
    pub pass: bool,
}

/// Compares the selection from `datum` over `[0, t1 + t2]`, shifted by `t1`,
/// with the selection restarted from its state at `t1-` over `[0, t2]`.
///
/// Every suite entry is rerun with the required horizon; `dt_out` must
/// divide `t1` and `t2`.
pub fn semiflow_audit<T: Real>(
    datum: &InitialDatum<T>,
    t1: T,
    t2: T,
    suite: &[SchemeConfig<T>],
    gas: &GasConstants<T>,
    params: &SelectionParams<T>,
    tol: T,
) -> Result<SemiflowReport<T>, SelectionError> {
    let with_end = |t_end: T| suite.iter().map(|c| SchemeConfig { t_end, ..*c }).collect::<Vec<_>>();
    let first_set = generate_candidates(datum, &with_end(t1 + t2), gas)?;
    let (first, _) = sieve_select(&first_set, params)?;
    if t1 == T::zero() {
        return Ok(SemiflowReport {
            t1,
            t2,
            first_selection: first.id().to_string(),
            second_selection: first.id().to_string(),
            distance: T::zero(),
            tol,
            pass: true,
        });
    }
    let restart_state = first.eval(t1, Side::Left)?.state.clone();
    let restart = InitialDatum::new(restart_state, datum.energy, first.grid(), gas)?;
    let second_set = generate_candidates(&restart, &with_end(t2), gas)?;
    let (second, _) = sieve_select(&second_set, params)?;
    let shifted = first.time_shift(t1)?;
    let distance = l1loc_distance(&shifted, second, t2, &FieldWeights::default())?;
    Ok(SemiflowReport {
        t1,
        t2,
        first_selection: first.id().to_string(),
        second_selection: second.id().to_string(),
        distance,
        tol,
        pass: distance <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(dt: f64, n: usize, f: impl Fn(usize) -> f64) -> ScalarHistory<f64> {
        ScalarHistory::from_samples((0..=n).map(|k| k as f64 * dt).collect(), (0..=n).map(f).collect()).unwrap()
    }

    fn run(family: Vec<(&str, ScalarHistory<f64>)>, f_index: usize) -> Lemma10Report<f64> {
        let family: Vec<(String, ScalarHistory<f64>)> = family.into_iter().map(|(id, h)| (id.to_string(), h)).collect();
        lemma10_audit(&family, f_index, &SelectionParams::default(), &OrderParams::default()).unwrap()
    }

    #[test]
    fn dominant_family() {
        let r = run(vec![("one", samples(0.25, 120, |_| 1.0)), ("zero", samples(0.25, 120, |_| 0.0))], 0);
        assert!(r.hypothesis_holds && r.maximal);
        assert_eq!(r.pairs, vec![("zero".to_string(), PairVerdict::Dominates)]);
    }

    #[test]
    fn oscillating_family() {
        let f = samples(0.25, 120, |_| 0.5);
        let g = samples(0.25, 120, |k| match k {
            0 => 0.5,
            k if k % 2 == 1 => 0.4,
            _ => 0.6,
        });
        let r = run(vec![("f", f), ("g", g)], 0);
        assert!(r.hypothesis_holds, "{:?}", r.hypothesis_failures);
        assert!(r.maximal);
        assert_eq!(r.pairs, vec![("g".to_string(), PairVerdict::FEquivalent)]);
    }

    #[test]
    fn swapped_roles_fail_the_hypothesis() {
        let r = run(vec![("one", samples(0.25, 120, |_| 1.0)), ("zero", samples(0.25, 120, |_| 0.0))], 1);
        assert!(!r.hypothesis_holds);
        assert_eq!(r.hypothesis_failures.len(), 9);
        assert!(!r.maximal);
    }

    #[test]
    fn separation_of_indicators() {
        let p: SelectionParams<f64> = SelectionParams::default();
        let f1: ScalarHistory<f64> = ScalarHistory::indicator_before(1.0, 40.0, 0.25).unwrap();
        let f2 = ScalarHistory::indicator_before(2.0, 40.0, 0.25).unwrap();
        match separation_audit(&f1, &f2, &p, 8, 1e-12).unwrap() {
            Separation::Distinguished { n, lambda, value, .. } => {
                assert_eq!(n, 0);
                let exact = (1.0 - (-lambda).exp()) / lambda - (1.0 - (-2.0 * lambda).exp()) / lambda;
                assert!((value - exact).abs() < 1e-12);
            }
            Separation::Indistinguished => panic!("indicators not separated"),
        }
        assert_eq!(separation_audit(&f1, &f1, &p, 8, 1e-12).unwrap(), Separation::Indistinguished);
    }

    #[test]
    fn separation_with_one_sign_change() {
        let f1: ScalarHistory<f64> = ScalarHistory::piecewise_constant(&[0.0, 1.0, 3.0], &[1.0, -0.5, 0.0], 40.0).unwrap();
        let f2 = ScalarHistory::piecewise_constant(&[0.0], &[0.0], 40.0).unwrap();
        let r = separation_audit(&f1, &f2, &SelectionParams::default(), 8, 1e-12).unwrap();
        assert!(matches!(r, Separation::Distinguished { n: 0, .. }), "{r:?}");
    }
}
