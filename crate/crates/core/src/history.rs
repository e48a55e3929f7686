//! Scalar functions of bounded variation on `[0, horizon]`, sampled at
//! nodes with separate one-sided values.
//!
//! Between two nodes the function is the linear interpolant of the right
//! value at the first node and the left value at the second. A jump at a
//! node is a differing left/right pair; a piecewise constant function is a
//! history whose left value at each node repeats the previous right value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::trajectory::Side;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistoryError {
    #[error("history needs at least one node, starting at t = 0")]
    BadStart,
    #[error("node times must be strictly increasing (index {0})")]
    NonIncreasing(usize),
    #[error("value arrays do not match the node count")]
    Shape,
    #[error("t = {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("Laplace parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarHistory<T> {
    times: Vec<T>,
    left: Vec<T>,
    right: Vec<T>,
}

/// Truncated Laplace integral with a certified bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue<T> {
    pub lambda: T,
    /// `int_0^horizon exp(-lambda t) f(t) dt`
    pub value: T,
    /// `B exp(-lambda horizon) / lambda` with `B` a bound on `|f|`
    pub tail: T,
}

impl<T: Real> LaplaceValue<T> {
    pub fn lower(&self) -> T {
        self.value - self.tail
    }

    pub fn upper(&self) -> T {
        self.value + self.tail
    }

    /// Certified intervals overlap after widening both by `slack`.
    pub fn overlaps(&self, other: &Self, slack: T) -> bool {
        (self.value - other.value).abs() <= self.tail + other.tail + slack
    }
}

impl<T: Real> ScalarHistory<T> {
    /// `left[0]` is the value at `0-`.
    pub fn new(times: Vec<T>, left: Vec<T>, right: Vec<T>) -> Result<Self, HistoryError> {
        if times.is_empty() || times[0] != T::zero() {
            return Err(HistoryError::BadStart);
        }
        if left.len() != times.len() || right.len() != times.len() {
            return Err(HistoryError::Shape);
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(HistoryError::NonIncreasing(k + 1));
        }
        Ok(Self { times, left, right })
    }

    /// Continuous samples, linearly interpolated.
    pub fn from_samples(times: Vec<T>, values: Vec<T>) -> Result<Self, HistoryError> {
        Self::new(times, values.clone(), values)
    }

    /// Value `values[k]` on `[breaks[k], breaks[k+1])`, the last value held
    /// until `horizon`. `breaks[0]` must be 0; the value at `0-` is `values[0]`.
    pub fn piecewise_constant(breaks: &[T], values: &[T], horizon: T) -> Result<Self, HistoryError> {
        if breaks.len() != values.len() || breaks.is_empty() {
            return Err(HistoryError::Shape);
        }
        let mut times = breaks.to_vec();
        let mut left = Vec::with_capacity(breaks.len() + 1);
        left.push(values[0]);
        left.extend_from_slice(&values[..values.len() - 1]);
        let mut right = values.to_vec();
        let last = *values.last().unwrap();
        if horizon > *breaks.last().unwrap() {
            times.push(horizon);
            left.push(last);
            right.push(last);
        }
        Self::new(times, left, right)
    }

    /// Indicator of `[0, a)` on `[0, horizon]`; node spacing at most `max_step`.
    pub fn indicator_before(a: T, horizon: T, max_step: T) -> Result<Self, HistoryError> {
        let mut breaks = vec![T::zero()];
        let mut values = vec![T::one()];
        let push_range = |from: T, to: T, v: T, breaks: &mut Vec<T>, values: &mut Vec<T>| {
            let n = ((to - from) / max_step).ceil().to_usize().unwrap_or(1).max(1);
            for k in 1..n {
                breaks.push(from + (to - from) * T::of_usize(k) / T::of_usize(n));
                values.push(v);
            }
        };
        if a > T::zero() && a < horizon {
            push_range(T::zero(), a, T::one(), &mut breaks, &mut values);
            breaks.push(a);
            values.push(T::zero());
            push_range(a, horizon, T::zero(), &mut breaks, &mut values);
        } else {
            let v = if a >= horizon { T::one() } else { T::zero() };
            values[0] = v;
            push_range(T::zero(), horizon, v, &mut breaks, &mut values);
        }
        Self::piecewise_constant(&breaks, &values, horizon)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn left_values(&self) -> &[T] {
        &self.left
    }

    pub fn right_values(&self) -> &[T] {
        &self.right
    }

    pub fn horizon(&self) -> T {
        *self.times.last().unwrap()
    }

    /// `sup |f|` over the stored samples.
    pub fn sup_norm(&self) -> T {
        self.left.iter().chain(&self.right).fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Value at `t-` or `t+`. Between nodes the linear interpolant.
    pub fn eval(&self, t: T, side: Side) -> Result<T, HistoryError> {
        let horizon = self.horizon();
        if t < T::zero() || t > horizon {
            return Err(HistoryError::OutOfRange { t: t.as_f64(), horizon: horizon.as_f64() });
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        if self.times[k] == t {
            return Ok(match side {
                Side::Left => self.left[k],
                Side::Right => self.right[k],
            });
        }
        let (a, b) = (self.times[k], self.times[k + 1]);
        let w = (t - a) / (b - a);
        Ok(self.right[k] + (self.left[k + 1] - self.right[k]) * w)
    }

    /// Pointwise combination on the union of both node sets.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let horizon = self.horizon().min(other.horizon());
        let mut times: Vec<T> = self
            .times
            .iter()
            .chain(&other.times)
            .copied()
            .filter(|&t| t <= horizon)
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let pick = |h: &Self, t, side| h.eval(t, side).expect("t within both horizons");
        let left = times.iter().map(|&t| f(pick(self, t, Side::Left), pick(other, t, Side::Left))).collect();
        let right = times.iter().map(|&t| f(pick(self, t, Side::Right), pick(other, t, Side::Right))).collect();
        Self { times, left, right }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            times: self.times.clone(),
            left: self.left.iter().map(|&v| f(v)).collect(),
            right: self.right.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `int_0^horizon exp(-lambda t) f(t) dt` for the piecewise linear
    /// interpolant, integrated exactly against the exponential weight, plus
    /// the tail certificate `bound exp(-lambda horizon) / lambda`.
    ///
    /// `horizon` is clamped to the history's own horizon.
    pub fn laplace(&self, lambda: T, bound: T, horizon: T) -> Result<LaplaceValue<T>, HistoryError> {
        if !(lambda > T::zero()) {
            return Err(HistoryError::NonPositiveLambda(lambda.as_f64()));
        }
        let horizon = horizon.min(self.horizon());
        let mut value = T::zero();
        for k in 0..self.times.len() - 1 {
            let a = self.times[k];
            if a >= horizon {
                break;
            }
            let mut b = self.times[k + 1];
            let fa = self.right[k];
            let mut fb = self.left[k + 1];
            if b > horizon {
                fb = fa + (fb - fa) * (horizon - a) / (b - a);
                b = horizon;
            }
            value += exp_weighted_linear(lambda, a, b, fa, fb);
        }
        let tail = bound * (-lambda * horizon).exp() / lambda;
        Ok(LaplaceValue { lambda, value, tail })
    }
}

/// `int_a^b exp(-lambda t) (fa + (fb - fa)(t - a)/(b - a)) dt`, evaluated
/// without cancellation for small `lambda (b - a)`.
pub(crate) fn exp_weighted_linear<T: Real>(lambda: T, a: T, b: T, fa: T, fb: T) -> T {
    let h = b - a;
    if !(h > T::zero()) {
        return T::zero();
    }
    let x = lambda * h;
    let ea = (-lambda * a).exp();
    // 1 - exp(-x)
    let m0 = -(-x).exp_m1();
    // 1 - (1 + x) exp(-x)
    let m1 = if x < T::of(0.1) {
        let mut term = x * x / T::of(2.0);
        let mut sum = T::zero();
        let mut k = 2usize;
        // sum_{k>=2} (-1)^k (k-1) x^k / k!
        while k < 24 {
            let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
            sum += sign * T::of_usize(k - 1) * term;
            term = term * x / T::of_usize(k + 1);
            k += 1;
        }
        sum
    } else {
        m0 - x * (-x).exp()
    };
    // int_a^b e^{-lambda t} dt = ea m0 / lambda
    // int_a^b e^{-lambda t} (t - a) dt = ea m1 / lambda^2
    ea * (fa * m0 / lambda + (fb - fa) / h * m1 / (lambda * lambda))
}
