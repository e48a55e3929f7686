//! Exact Riemann solver for the ideal-gas Euler equations, the all-shock
//! (expansion-shock) weak solution, and exact cell averages of both.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::state::{DefectState, FluidState, Grid};
use crate::thermo::{GasConstants, ThermoError};
use crate::trajectory::InitialDatum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiemannError {
    #[error("Riemann states need positive density and pressure")]
    NonPositive,
    #[error("data generate vacuum: 2(cL + cR)/(gamma - 1) <= uR - uL")]
    Vacuum,
    #[error("pressure iteration did not converge (residual {0})")]
    NotConverged(f64),
    #[error("no rarefaction to replace; expansion-shock solution not constructible")]
    NotConstructible,
    #[error("waves reach the walls before t = {0}")]
    WavesReachWall(f64),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error("invalid Riemann datum: {0}")]
    Datum(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive<T> {
    pub rho: T,
    pub u: T,
    pub p: T,
}

impl<T: Real> Primitive<T> {
    pub fn new(rho: T, u: T, p: T) -> Self {
        Self { rho, u, p }
    }

    pub fn sound_speed(&self, gamma: T) -> T {
        (gamma * self.p / self.rho).sqrt()
    }

    /// Conserved `(rho, m, E)`.
    pub fn conserved(&self, gamma: T) -> [T; 3] {
        let m = self.rho * self.u;
        [self.rho, m, self.p / (gamma - T::one()) + T::of(0.5) * m * self.u]
    }

    /// Physical flux `(m, m u + p, (E + p) u)`.
    pub fn flux(&self, gamma: T) -> [T; 3] {
        let [_, m, e] = self.conserved(gamma);
        [m, m * self.u + self.p, (e + self.p) * self.u]
    }

    /// Total entropy density `S = rho s`.
    pub fn entropy(&self, gas: &GasConstants<T>) -> Result<T, ThermoError> {
        Ok(self.rho * gas.entropy_from_primitive(self.rho, self.p / self.rho)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannDatum<T> {
    pub left: Primitive<T>,
    pub right: Primitive<T>,
}

impl<T: Real> RiemannDatum<T> {
    pub fn new(left: Primitive<T>, right: Primitive<T>) -> Result<Self, RiemannError> {
        for s in [&left, &right] {
            if !(s.rho > T::zero() && s.p > T::zero()) || !s.u.is_finite() {
                return Err(RiemannError::NonPositive);
            }
        }
        Ok(Self { left, right })
    }

    /// `(1, 0, 1) | (0.125, 0, 0.1)`.
    pub fn sod() -> Self {
        Self::new(Primitive::new(T::one(), T::zero(), T::one()), Primitive::new(T::of(0.125), T::zero(), T::of(0.1)))
            .expect("positive states")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Shock if compressive, rarefaction otherwise.
    Natural,
    /// Rankine-Hugoniot curve even where the wave expands.
    ForceShock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Wave<T> {
    Shock { speed: T },
    Rarefaction { head: T, tail: T },
}

impl<T: Real> Wave<T> {
    fn speeds(&self) -> Vec<T> {
        match *self {
            Wave::Shock { speed } => vec![speed],
            Wave::Rarefaction { head, tail } => vec![head, tail],
        }
    }
}

/// Self-similar solution `W(x/t)` of a Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannSolution<T> {
    pub datum: RiemannDatum<T>,
    pub gamma: T,
    pub p_star: T,
    pub u_star: T,
    pub rho_star_left: T,
    pub rho_star_right: T,
    pub left_wave: Wave<T>,
    pub right_wave: Wave<T>,
    /// `|f_L(p*) + f_R(p*) + uR - uL|`
    pub residual: T,
}

struct SideFunction<T> {
    rho: T,
    p: T,
    c: T,
    a: T,
    b: T,
    gamma: T,
    branch: Branch,
}

impl<T: Real> SideFunction<T> {
    fn new(s: &Primitive<T>, gamma: T, branch: Branch) -> Self {
        let gp1 = gamma + T::one();
        Self {
            rho: s.rho,
            p: s.p,
            c: s.sound_speed(gamma),
            a: T::of(2.0) / (gp1 * s.rho),
            b: (gamma - T::one()) / gp1 * s.p,
            gamma,
            branch,
        }
    }

    fn is_shock(&self, p: T) -> bool {
        self.branch == Branch::ForceShock || p > self.p
    }

    /// Velocity jump across the wave and its derivative in `p`.
    fn eval(&self, p: T) -> (T, T) {
        if self.is_shock(p) {
            let q = (self.a / (p + self.b)).sqrt();
            ((p - self.p) * q, q * (T::one() - (p - self.p) / (T::of(2.0) * (p + self.b))))
        } else {
            let g = self.gamma;
            let e = (g - T::one()) / (T::of(2.0) * g);
            let r = p / self.p;
            (
                T::of(2.0) * self.c / (g - T::one()) * (r.powf(e) - T::one()),
                r.powf(-(g + T::one()) / (T::of(2.0) * g)) / (self.rho * self.c),
            )
        }
    }

    fn star_density(&self, p: T) -> T {
        let g = self.gamma;
        let r = p / self.p;
        if self.is_shock(p) {
            let g6 = (g - T::one()) / (g + T::one());
            self.rho * (r + g6) / (g6 * r + T::one())
        } else {
            self.rho * r.powf(T::one() / g)
        }
    }
}

/// Star state by damped Newton iteration on the pressure function.
///
/// Converges when the relative pressure update drops below `4 eps`; the
/// final residual must not exceed `1e-12 max(1, cL + cR + |uR - uL|)`.
pub fn solve<T: Real>(datum: &RiemannDatum<T>, gamma: T, branches: [Branch; 2]) -> Result<RiemannSolution<T>, RiemannError> {
    let (l, r) = (&datum.left, &datum.right);
    let fl = SideFunction::new(l, gamma, branches[0]);
    let fr = SideFunction::new(r, gamma, branches[1]);
    let du = r.u - l.u;
    let natural = branches == [Branch::Natural, Branch::Natural];
    if natural && T::of(2.0) * (fl.c + fr.c) / (gamma - T::one()) <= du {
        return Err(RiemannError::Vacuum);
    }
    let f = |p: T| {
        let (a, da) = fl.eval(p);
        let (b, db) = fr.eval(p);
        (a + b + du, da + db)
    };
    let tiny = T::of(1e-14) * l.p.min(r.p);
    if f(tiny).0 > T::zero() {
        // all-shock curves never reach the required velocity jump
        return Err(if natural { RiemannError::Vacuum } else { RiemannError::NotConstructible });
    }
    let pvrs = T::of(0.5) * (l.p + r.p) - T::of(0.125) * du * (l.rho + r.rho) * (fl.c + fr.c);
    let mut p = pvrs.max(tiny);
    let scale = T::one().max(fl.c + fr.c + du.abs());
    let mut res = f(p).0;
    for _ in 0..200 {
        let (val, der) = f(p);
        let mut step = val / der;
        let mut next = p - step;
        // keep p positive and the residual decreasing
        let mut tries = 0;
        while (next <= T::zero() || f(next).0.abs() > val.abs()) && tries < 60 {
            step /= T::of(2.0);
            next = p - step;
            tries += 1;
        }
        if next <= T::zero() {
            next = p / T::of(2.0);
        }
        let change = (next - p).abs() / p;
        p = next;
        res = f(p).0;
        if change <= T::of(4.0) * T::epsilon() || res == T::zero() {
            break;
        }
    }
    if !(res.abs() <= T::of(1e-12) * scale) {
        return Err(RiemannError::NotConverged(res.as_f64()));
    }
    let u_star = T::of(0.5) * (l.u + r.u) + T::of(0.5) * (fr.eval(p).0 - fl.eval(p).0);
    let g = gamma;
    let e = (g - T::one()) / (T::of(2.0) * g);
    let shock_factor = |ratio: T| ((g + T::one()) / (T::of(2.0) * g) * ratio + (g - T::one()) / (T::of(2.0) * g)).sqrt();
    let left_wave = if fl.is_shock(p) {
        Wave::Shock { speed: l.u - fl.c * shock_factor(p / l.p) }
    } else {
        Wave::Rarefaction { head: l.u - fl.c, tail: u_star - fl.c * (p / l.p).powf(e) }
    };
    let right_wave = if fr.is_shock(p) {
        Wave::Shock { speed: r.u + fr.c * shock_factor(p / r.p) }
    } else {
        Wave::Rarefaction { head: r.u + fr.c, tail: u_star + fr.c * (p / r.p).powf(e) }
    };
    Ok(RiemannSolution {
        datum: *datum,
        gamma,
        p_star: p,
        u_star,
        rho_star_left: fl.star_density(p),
        rho_star_right: fr.star_density(p),
        left_wave,
        right_wave,
        residual: res.abs(),
    })
}

/// Entropy solution.
pub fn riemann_exact<T: Real>(datum: &RiemannDatum<T>, gas: &GasConstants<T>) -> Result<RiemannSolution<T>, RiemannError> {
    solve(datum, gas.gamma(), [Branch::Natural, Branch::Natural])
}

/// Weak solution with every rarefaction of the entropy solution replaced
/// by a single Rankine-Hugoniot discontinuity.
pub fn riemann_expansion_shock<T: Real>(datum: &RiemannDatum<T>, gas: &GasConstants<T>) -> Result<RiemannSolution<T>, RiemannError> {
    let exact = riemann_exact(datum, gas)?;
    let has_rarefaction = exact.p_star < datum.left.p || exact.p_star < datum.right.p;
    if !has_rarefaction {
        return Err(RiemannError::NotConstructible);
    }
    solve(datum, gas.gamma(), [Branch::ForceShock, Branch::ForceShock])
}

impl<T: Real> RiemannSolution<T> {
    /// `W(xi)` at `xi = x / t`.
    pub fn sample(&self, xi: T) -> Primitive<T> {
        let g = self.gamma;
        let (l, r) = (&self.datum.left, &self.datum.right);
        let two = T::of(2.0);
        let gp1 = g + T::one();
        let gm1 = g - T::one();
        if xi <= self.u_star {
            let star = Primitive::new(self.rho_star_left, self.u_star, self.p_star);
            match self.left_wave {
                Wave::Shock { speed } => {
                    if xi <= speed {
                        *l
                    } else {
                        star
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi <= head {
                        *l
                    } else if xi >= tail {
                        star
                    } else {
                        let c = l.sound_speed(g);
                        let base = two / gp1 + gm1 / (gp1 * c) * (l.u - xi);
                        Primitive::new(
                            l.rho * base.powf(two / gm1),
                            two / gp1 * (c + gm1 / two * l.u + xi),
                            l.p * base.powf(two * g / gm1),
                        )
                    }
                }
            }
        } else {
            let star = Primitive::new(self.rho_star_right, self.u_star, self.p_star);
            match self.right_wave {
                Wave::Shock { speed } => {
                    if xi >= speed {
                        *r
                    } else {
                        star
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi >= head {
                        *r
                    } else if xi <= tail {
                        star
                    } else {
                        let c = r.sound_speed(g);
                        let base = two / gp1 - gm1 / (gp1 * c) * (r.u - xi);
                        Primitive::new(
                            r.rho * base.powf(two / gm1),
                            two / gp1 * (-c + gm1 / two * r.u + xi),
                            r.p * base.powf(two * g / gm1),
                        )
                    }
                }
            }
        }
    }

    /// Similarity coordinates of all wave edges, increasing.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut v = self.left_wave.speeds();
        v.push(self.u_star);
        v.extend(self.right_wave.speeds());
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Largest Rankine-Hugoniot residual `|[F] - s [U]|` over the shocks.
    pub fn rankine_hugoniot_residual(&self) -> T {
        let g = self.gamma;
        let mut worst = T::zero();
        let sides = [
            (self.left_wave, self.datum.left, Primitive::new(self.rho_star_left, self.u_star, self.p_star)),
            (self.right_wave, Primitive::new(self.rho_star_right, self.u_star, self.p_star), self.datum.right),
        ];
        for (wave, a, b) in sides {
            if let Wave::Shock { speed } = wave {
                let (ua, ub) = (a.conserved(g), b.conserved(g));
                let (fa, fb) = (a.flux(g), b.flux(g));
                for k in 0..3 {
                    worst = worst.max(((fb[k] - fa[k]) - speed * (ub[k] - ua[k])).abs());
                }
            }
        }
        worst
    }
}

const GAUSS_RULE: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Riemann problem placed in the slab with the jump at `interface`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannProblem<T> {
    pub datum: RiemannDatum<T>,
    pub grid: Grid<T>,
    pub interface: T,
}

impl<T: Real> RiemannProblem<T> {
    /// Jump at the middle of the slab.
    pub fn centered(datum: RiemannDatum<T>, grid: Grid<T>) -> Self {
        Self { datum, grid, interface: grid.length / T::of(2.0) }
    }

    /// Cell averages of `(rho, m, S)` of the self-similar solution at time
    /// `t`, with the Jensen gaps of the averaging as kinetic and internal
    /// defects. Pieces between wave edges are integrated by 8-point
    /// Gauss-Legendre (exact inside fans for `gamma = 1.4`).
    pub fn cell_averages(
        &self,
        solution: &RiemannSolution<T>,
        t: T,
        gas: &GasConstants<T>,
    ) -> Result<(FluidState<T>, DefectState<T>), RiemannError> {
        if !(t > T::zero()) {
            return self.datum_averages(gas);
        }
        let x0 = self.interface;
        let edges: Vec<T> = solution.breakpoints().iter().map(|&xi| x0 + xi * t).collect();
        self.average(&edges, |x| solution.sample((x - x0) / t), &GAUSS_RULE, gas)
    }

    fn datum_averages(&self, gas: &GasConstants<T>) -> Result<(FluidState<T>, DefectState<T>), RiemannError> {
        let x0 = self.interface;
        let d = self.datum;
        // constant on each piece, so one sample per piece is exact
        self.average(&[x0], |x| if x < x0 { d.left } else { d.right }, &[(0.0, 2.0)], gas)
    }

    fn average(
        &self,
        edges: &[T],
        sample: impl Fn(T) -> Primitive<T>,
        rule: &[(f64, f64)],
        gas: &GasConstants<T>,
    ) -> Result<(FluidState<T>, DefectState<T>), RiemannError> {
        let c_v = gas.c_v();
        let n = self.grid.cells;
        let dx = self.grid.dx();
        let mut state = FluidState::uniform(n, T::zero(), T::zero(), T::zero());
        let mut defects = DefectState::zero(n);
        for i in 0..n {
            let a = T::of_usize(i) * dx;
            let b = a + dx;
            let mut cuts = vec![a];
            cuts.extend(edges.iter().copied().filter(|&e| e > a && e < b));
            cuts.push(b);
            let (mut rho, mut m, mut s, mut kin, mut int) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
            for w in cuts.windows(2) {
                let half = (w[1] - w[0]) / T::of(2.0);
                let mid = (w[1] + w[0]) / T::of(2.0);
                for &(xk, wk) in rule {
                    let q = sample(mid + half * T::of(xk));
                    let wt = half * T::of(wk);
                    rho += wt * q.rho;
                    m += wt * q.rho * q.u;
                    s += wt * q.entropy(gas)?;
                    kin += wt * T::of(0.5) * q.rho * q.u * q.u;
                    int += wt * c_v * q.p;
                }
            }
            let (rho, m, s, kin, int) = (rho / dx, m / dx, s / dx, kin / dx, int / dx);
            let mean = crate::thermo::ThermoPoint::new(rho, m, s);
            let mean_kin = T::of(0.5) * m * m / rho;
            let mean_int = gas.internal_energy_density(&mean)?.finite().unwrap_or_else(T::infinity);
            state.rho[i] = rho;
            state.momentum[i] = m;
            state.entropy[i] = s;
            defects.kinetic[i] = (kin - mean_kin).max(T::zero());
            defects.internal[i] = (int - mean_int).max(T::zero());
        }
        defects.convective_plus = defects.kinetic.clone();
        defects.convective_minus = defects.kinetic.clone();
        Ok((state, defects))
    }

    /// Cell averages of the two states with the budget set to their energy.
    pub fn initial_datum(&self, gas: &GasConstants<T>) -> Result<InitialDatum<T>, RiemannError> {
        let (state, _) = self.datum_averages(gas)?;
        InitialDatum::tight(state, &self.grid, gas).map_err(|e| RiemannError::Datum(e.to_string()))
    }

    /// Checks that no wave leaves the slab before `t_end`.
    pub fn check_horizon(&self, solution: &RiemannSolution<T>, t_end: T) -> Result<(), RiemannError> {
        let bp = solution.breakpoints();
        let lo = self.interface + bp[0] * t_end;
        let hi = self.interface + bp[bp.len() - 1] * t_end;
        if lo < T::zero() || hi > self.grid.length {
            return Err(RiemannError::WavesReachWall(t_end.as_f64()));
        }
        Ok(())
    }
}
