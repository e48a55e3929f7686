//! Ideal-gas equation of state written in the phase variables
//! `(rho, m, S)` with `S = rho * s` the total entropy density.
//!
//! Pressure is `p = rho^gamma * exp(S / (c_v rho))`, internal energy density
//! is `c_v * p`, and temperature is `p / rho`. Both pressure and kinetic
//! energy are extended to the vacuum boundary `rho = 0` as convex lower
//! semicontinuous functions, possibly taking the value `+inf`
//! ([`Extended::Infinite`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Extended, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("adiabatic exponent must exceed 1, got {0}")]
    InvalidGamma(f64),
    #[error("negative density {0}")]
    NegativeDensity(f64),
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("log-pressure {0} exceeds the representable range")]
    Overflow(f64),
}

/// Adiabatic exponent, specific heat at constant volume and entropy floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConstants<T> {
    gamma: T,
    c_v: T,
    s0: T,
}

impl<T: Real> GasConstants<T> {
    /// Gas with adiabatic exponent `gamma` and entropy floor `s0 = 0`.
    pub fn new(gamma: T) -> Result<Self, ThermoError> {
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(ThermoError::InvalidGamma(gamma.as_f64()));
        }
        Ok(Self {
            gamma,
            c_v: T::one() / (gamma - T::one()),
            s0: T::zero(),
        })
    }

    /// Diatomic gas, `gamma = 1.4`.
    pub fn diatomic() -> Self {
        Self::new(T::of(1.4)).expect("1.4 > 1")
    }

    pub fn with_entropy_floor(mut self, s0: T) -> Self {
        self.s0 = s0;
        self
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn c_v(&self) -> T {
        self.c_v
    }

    /// Lower bound `s0` of the specific entropy (minimum-entropy principle).
    pub fn entropy_floor(&self) -> T {
        self.s0
    }

    /// `ln p = gamma ln rho + S/(c_v rho)` for `rho > 0`.
    fn log_pressure(&self, rho: T, entropy: T) -> T {
        self.gamma * rho.ln() + entropy / (self.c_v * rho)
    }

    fn exp_checked(&self, log_value: T) -> Result<T, ThermoError> {
        // Leave headroom for the c_v factor and for summing cells.
        let limit = T::max_value().ln() - T::of(8.0);
        if log_value > limit {
            return Err(ThermoError::Overflow(log_value.as_f64()));
        }
        Ok(log_value.exp())
    }

    pub fn pressure(&self, pt: &ThermoPoint<T>) -> Result<Extended<T>, ThermoError> {
        let ThermoPoint { rho, entropy, .. } = *pt;
        if rho < T::zero() {
            return Err(ThermoError::NegativeDensity(rho.as_f64()));
        }
        if rho == T::zero() {
            return Ok(if entropy <= T::zero() {
                Extended::zero()
            } else {
                Extended::Infinite
            });
        }
        self.exp_checked(self.log_pressure(rho, entropy)).map(Extended::Finite)
    }

    /// `rho e = c_v p`, with the same vacuum extension as [`Self::pressure`].
    pub fn internal_energy_density(&self, pt: &ThermoPoint<T>) -> Result<Extended<T>, ThermoError> {
        Ok(self.pressure(pt)? * self.c_v)
    }

    /// `|m|^2 / (2 rho)`; zero for `m = 0`, infinite for `rho = 0, m != 0`.
    pub fn kinetic_energy_density(&self, rho: T, momentum: T) -> Result<Extended<T>, ThermoError> {
        if rho < T::zero() {
            return Err(ThermoError::NegativeDensity(rho.as_f64()));
        }
        if momentum == T::zero() {
            return Ok(Extended::zero());
        }
        if rho == T::zero() {
            return Ok(Extended::Infinite);
        }
        Ok(Extended::Finite(momentum * momentum / (T::of(2.0) * rho)))
    }

    pub fn total_energy_density(&self, pt: &ThermoPoint<T>) -> Result<Extended<T>, ThermoError> {
        Ok(self.kinetic_energy_density(pt.rho, pt.momentum)? + self.internal_energy_density(pt)?)
    }

    /// `theta = p / rho = rho^(gamma-1) exp(S/(c_v rho))`.
    pub fn temperature(&self, pt: &ThermoPoint<T>) -> Result<T, ThermoError> {
        if !(pt.rho > T::zero()) {
            return Err(ThermoError::NonPositiveDensity(pt.rho.as_f64()));
        }
        self.exp_checked(self.log_pressure(pt.rho, pt.entropy) - pt.rho.ln())
    }

    /// Specific entropy `s = c_v ln theta - ln rho`.
    pub fn entropy_from_primitive(&self, rho: T, theta: T) -> Result<T, ThermoError> {
        if !(rho > T::zero()) {
            return Err(ThermoError::NonPositiveDensity(rho.as_f64()));
        }
        if !(theta > T::zero()) {
            return Err(ThermoError::NonPositiveTemperature(theta.as_f64()));
        }
        Ok(self.c_v * theta.ln() - rho.ln())
    }

    /// Total entropy density `S = rho s` of the state with density `rho` and pressure `p`.
    pub fn total_entropy(&self, rho: T, pressure: T) -> Result<T, ThermoError> {
        Ok(rho * self.entropy_from_primitive(rho, pressure / rho)?)
    }

    /// Isentropic sound speed `sqrt(gamma p / rho)`.
    pub fn sound_speed(&self, rho: T, pressure: T) -> T {
        (self.gamma * pressure / rho).sqrt()
    }

    /// Second derivatives of `p(rho, S)` for `rho > 0`.
    pub fn pressure_hessian(&self, pt: &ThermoPoint<T>) -> Result<PressureHessian<T>, ThermoError> {
        let (rho, entropy) = (pt.rho, pt.entropy);
        if !(rho > T::zero()) {
            return Err(ThermoError::NonPositiveDensity(rho.as_f64()));
        }
        let g = self.gamma;
        let gm1 = g - T::one();
        let a = entropy / self.c_v;
        // common factor rho^(gamma-4) exp(S/(c_v rho))
        let w = self.exp_checked(self.log_pressure(rho, entropy) - T::of(4.0) * rho.ln())?;
        let rho2 = rho * rho;
        let shifted = gm1 * rho - a;
        Ok(PressureHessian {
            rho_rho: (gm1 * rho2 + shifted * shifted) * w,
            rho_entropy: (gm1 * rho2 - a * rho) / self.c_v * w,
            entropy_entropy: rho2 / (self.c_v * self.c_v) * w,
        })
    }
}

impl<T: Real> Default for GasConstants<T> {
    fn default() -> Self {
        Self::diatomic()
    }
}

/// One point of the phase space `(rho, m, S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint<T> {
    pub rho: T,
    pub momentum: T,
    pub entropy: T,
}

impl<T: Real> ThermoPoint<T> {
    pub fn new(rho: T, momentum: T, entropy: T) -> Self {
        Self { rho, momentum, entropy }
    }

    /// At rest, `m = 0`.
    pub fn at_rest(rho: T, entropy: T) -> Self {
        Self::new(rho, T::zero(), entropy)
    }
}

/// Symmetric 2x2 Hessian of the pressure in `(rho, S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureHessian<T> {
    pub rho_rho: T,
    pub rho_entropy: T,
    pub entropy_entropy: T,
}

impl<T: Real> PressureHessian<T> {
    pub fn trace(&self) -> T {
        self.rho_rho + self.entropy_entropy
    }

    pub fn determinant(&self) -> T {
        self.rho_rho * self.entropy_entropy - self.rho_entropy * self.rho_entropy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (T, T) {
        let half_tr = self.trace() / T::of(2.0);
        let half_diff = (self.rho_rho - self.entropy_entropy) / T::of(2.0);
        let r = (half_diff * half_diff + self.rho_entropy * self.rho_entropy).sqrt();
        // Smaller root via det / larger root avoids cancellation.
        let large = half_tr + r;
        (self.determinant() / large, large)
    }
}

/// Closed form of `det D^2 p(rho, S)`, i.e.
/// `(gamma - 1) rho^(2 gamma - 4) exp(2 S / (c_v rho)) / c_v^2`.
pub fn pressure_hessian_determinant<T: Real>(gas: &GasConstants<T>, rho: T, entropy: T) -> T {
    let g = gas.gamma();
    let cv = gas.c_v();
    let log = (T::of(2.0) * g - T::of(4.0)) * rho.ln() + T::of(2.0) * entropy / (cv * rho);
    (g - T::one()) * log.exp() / (cv * cv)
}
