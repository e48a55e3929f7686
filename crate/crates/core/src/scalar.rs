use std::fmt::{Debug, Display, LowerExp};
use std::ops::{Add, Mul};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used by every numerical routine in the crate.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; `f32` works but most 1e-10 level checks will not hold.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A value on the extended half-line `[0, +inf]`.
///
/// The convex extensions of pressure and kinetic energy take the value
/// `+inf` on part of the vacuum boundary. That value is carried as an
/// explicit variant so that it never arises from a floating-point overflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Extended<T> {
    pub fn zero() -> Self {
        Extended::Finite(T::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// Lossy conversion for plotting and logging; `Infinite` maps to `T::infinity()`.
    pub fn to_float(self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }
}

impl<T: Real> Add for Extended<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

/// Multiplication by a nonnegative finite factor.
impl<T: Real> Mul<T> for Extended<T> {
    type Output = Self;

    fn mul(self, rhs: T) -> Self {
        match self {
            Extended::Finite(a) => Extended::Finite(a * rhs),
            Extended::Infinite if rhs == T::zero() => Extended::Finite(T::zero()),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

/// Solves the tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// with the Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored.
///
/// The matrices assembled in this crate are strictly diagonally dominant, so
/// no pivoting is needed.
pub(crate) fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / denom } else { T::zero() };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}
