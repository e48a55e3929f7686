//! Numerical fluxes for the conservative variables `(rho, m, E)`.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved<T> {
    pub rho: T,
    pub m: T,
    pub e: T,
}

impl<T: Real> Conserved<T> {
    pub fn velocity(&self) -> T {
        self.m / self.rho
    }

    /// `(gamma - 1)(E - m^2 / 2 rho)`
    pub fn pressure(&self, gamma: T) -> T {
        (gamma - T::one()) * (self.e - T::of(0.5) * self.m * self.m / self.rho)
    }

    pub fn sound_speed(&self, gamma: T) -> T {
        (gamma * self.pressure(gamma) / self.rho).max(T::zero()).sqrt()
    }

    pub fn flux(&self, gamma: T) -> Conserved<T> {
        let u = self.velocity();
        let p = self.pressure(gamma);
        Conserved { rho: self.m, m: self.m * u + p, e: (self.e + p) * u }
    }

    /// Wall ghost: same density and energy, reversed momentum.
    pub fn mirrored(&self) -> Self {
        Self { rho: self.rho, m: -self.m, e: self.e }
    }

    fn lin(self, a: T, other: Self, b: T) -> Self {
        Self { rho: a * self.rho + b * other.rho, m: a * self.m + b * other.m, e: a * self.e + b * other.e }
    }
}

/// Global Lax-Friedrichs flux with numerical viscosity `dx / (2 dt)`.
pub fn lax_friedrichs<T: Real>(l: &Conserved<T>, r: &Conserved<T>, gamma: T, dx_over_dt: T) -> Conserved<T> {
    let half = T::of(0.5);
    let avg = l.flux(gamma).lin(half, r.flux(gamma), half);
    avg.lin(T::one(), r.lin(T::one(), *l, -T::one()), -half * dx_over_dt)
}

/// Local Lax-Friedrichs (Rusanov) flux.
pub fn rusanov<T: Real>(l: &Conserved<T>, r: &Conserved<T>, gamma: T) -> Conserved<T> {
    let a = (l.velocity().abs() + l.sound_speed(gamma)).max(r.velocity().abs() + r.sound_speed(gamma));
    let half = T::of(0.5);
    let avg = l.flux(gamma).lin(half, r.flux(gamma), half);
    avg.lin(T::one(), r.lin(T::one(), *l, -T::one()), -half * a)
}

/// HLLC flux with Davis wave-speed estimates.
pub fn hllc<T: Real>(l: &Conserved<T>, r: &Conserved<T>, gamma: T) -> Conserved<T> {
    let (ul, ur) = (l.velocity(), r.velocity());
    let (pl, pr) = (l.pressure(gamma), r.pressure(gamma));
    let (cl, cr) = (l.sound_speed(gamma), r.sound_speed(gamma));
    let sl = (ul - cl).min(ur - cr);
    let sr = (ul + cl).max(ur + cr);
    let fl = l.flux(gamma);
    let fr = r.flux(gamma);
    if sl >= T::zero() {
        return fl;
    }
    if sr <= T::zero() {
        return fr;
    }
    let ml = l.rho * (sl - ul);
    let mr = r.rho * (sr - ur);
    let s_star = (pr - pl + ul * ml - ur * mr) / (ml - mr);
    let star = |u: &Conserved<T>, s: T, vel: T, p: T| {
        let factor = u.rho * (s - vel) / (s - s_star);
        Conserved {
            rho: factor,
            m: factor * s_star,
            e: factor * (u.e / u.rho + (s_star - vel) * (s_star + p / (u.rho * (s - vel)))),
        }
    };
    if s_star >= T::zero() {
        let us = star(l, sl, ul, pl);
        fl.lin(T::one(), us.lin(T::one(), *l, -T::one()), sl)
    } else {
        let us = star(r, sr, ur, pr);
        fr.lin(T::one(), us.lin(T::one(), *r, -T::one()), sr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(rho: f64, u: f64, p: f64) -> Conserved<f64> {
        Conserved { rho, m: rho * u, e: p / 0.4 + 0.5 * rho * u * u }
    }

    #[test]
    fn consistency_with_physical_flux() {
        let u = state(1.3, 0.4, 0.9);
        let f = u.flux(1.4);
        for g in [rusanov(&u, &u, 1.4), hllc(&u, &u, 1.4), lax_friedrichs(&u, &u, 1.4, 7.0)] {
            assert!((g.rho - f.rho).abs() < 1e-15);
            assert!((g.m - f.m).abs() < 1e-15);
            assert!((g.e - f.e).abs() < 1e-15);
        }
    }

    #[test]
    fn hllc_resolves_stationary_contact() {
        let l = state(1.0, 0.0, 1.0);
        let r = state(0.2, 0.0, 1.0);
        let f = hllc(&l, &r, 1.4);
        assert!(f.rho.abs() < 1e-15 && f.e.abs() < 1e-15);
        assert!((f.m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wall_mass_flux_vanishes() {
        let u = state(0.7, 0.3, 2.0);
        for g in [rusanov(&u, &u.mirrored(), 1.4), hllc(&u, &u.mirrored(), 1.4)] {
            assert!(g.rho.abs() < 1e-15);
            assert!(g.e.abs() < 1e-14);
        }
    }
}
