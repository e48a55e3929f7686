//! Cell-averaged fields on a uniform grid of the slab `[0, L]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{solve_tridiagonal, Extended, Real};
use crate::thermo::{GasConstants, ThermoError, ThermoPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("grid needs at least 1 cell and a positive length")]
    InvalidGrid,
    #[error("field `{field}` has {got} cells, grid has {expected}")]
    LengthMismatch { field: &'static str, got: usize, expected: usize },
    #[error("negative {field} {value} in cell {cell}")]
    Negative { field: &'static str, cell: usize, value: f64 },
    #[error("non-finite {field} in cell {cell}")]
    NonFinite { field: &'static str, cell: usize },
    #[error("convective defects violate (c+ + c-)/2 = C_kin in cell {cell}")]
    ConvectiveSplit { cell: usize },
    #[error("infinite energy in cell {cell}")]
    InfiniteEnergy { cell: usize },
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub cells: usize,
    pub length: T,
}

impl<T: Real> Grid<T> {
    pub fn new(cells: usize, length: T) -> Result<Self, StateError> {
        if cells == 0 || !(length > T::zero()) || !length.is_finite() {
            return Err(StateError::InvalidGrid);
        }
        Ok(Self { cells, length })
    }

    pub fn dx(&self) -> T {
        self.length / T::of_usize(self.cells)
    }

    pub fn center(&self, i: usize) -> T {
        (T::of_usize(i) + T::of(0.5)) * self.dx()
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    /// Midpoint-rule integral of a cell field.
    pub fn integrate(&self, field: &[T]) -> T {
        field.iter().fold(T::zero(), |acc, &v| acc + v) * self.dx()
    }
}

/// Barycentric fluid fields `(rho, m, S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidState<T> {
    pub rho: Vec<T>,
    pub momentum: Vec<T>,
    pub entropy: Vec<T>,
}

impl<T: Real> FluidState<T> {
    pub fn uniform(cells: usize, rho: T, momentum: T, entropy: T) -> Self {
        Self {
            rho: vec![rho; cells],
            momentum: vec![momentum; cells],
            entropy: vec![entropy; cells],
        }
    }

    pub fn cells(&self) -> usize {
        self.rho.len()
    }

    pub fn point(&self, i: usize) -> ThermoPoint<T> {
        ThermoPoint::new(self.rho[i], self.momentum[i], self.entropy[i])
    }

    pub fn check_shape(&self, grid: &Grid<T>) -> Result<(), StateError> {
        for (field, v) in [("rho", &self.rho), ("momentum", &self.momentum), ("entropy", &self.entropy)] {
            if v.len() != grid.cells {
                return Err(StateError::LengthMismatch { field, got: v.len(), expected: grid.cells });
            }
            if let Some(cell) = v.iter().position(|x| !x.is_finite()) {
                return Err(StateError::NonFinite { field, cell });
            }
        }
        if let Some(cell) = self.rho.iter().position(|&r| r < T::zero()) {
            return Err(StateError::Negative { field: "rho", cell, value: self.rho[cell].as_f64() });
        }
        Ok(())
    }

    pub fn mass(&self, grid: &Grid<T>) -> T {
        grid.integrate(&self.rho)
    }

    pub fn total_momentum(&self, grid: &Grid<T>) -> T {
        grid.integrate(&self.momentum)
    }

    pub fn total_entropy(&self, grid: &Grid<T>) -> T {
        grid.integrate(&self.entropy)
    }

    /// Per-cell total energy density; errors if any cell is infinite.
    pub fn energy_density(&self, gas: &GasConstants<T>) -> Result<Vec<T>, StateError> {
        (0..self.cells())
            .map(|i| match gas.total_energy_density(&self.point(i))? {
                Extended::Finite(e) => Ok(e),
                Extended::Infinite => Err(StateError::InfiniteEnergy { cell: i }),
            })
            .collect()
    }

    pub fn total_energy(&self, grid: &Grid<T>, gas: &GasConstants<T>) -> Result<T, StateError> {
        Ok(grid.integrate(&self.energy_density(gas)?))
    }

    /// Largest violation `s0 rho_i - S_i` of the minimum-entropy principle
    /// (nonpositive when the principle holds).
    pub fn entropy_floor_violation(&self, gas: &GasConstants<T>) -> (usize, T) {
        let s0 = gas.entropy_floor();
        self.rho
            .iter()
            .zip(&self.entropy)
            .map(|(&r, &s)| s0 * r - s)
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// Max-norm distance over the three fields.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let pairs = [(&self.rho, &other.rho), (&self.momentum, &other.momentum), (&self.entropy, &other.entropy)];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (*x - *y).abs()))
            .fold(T::zero(), T::max)
    }
}

/// Nonnegative concentration defects per cell: kinetic, internal and the
/// two halves `c+`, `c-` of the convective defect on the 1D unit sphere
/// `{-1, +1}`, tied by `(c+ + c-)/2 = C_kin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectState<T> {
    pub kinetic: Vec<T>,
    pub internal: Vec<T>,
    pub convective_plus: Vec<T>,
    pub convective_minus: Vec<T>,
}

impl<T: Real> DefectState<T> {
    pub fn zero(cells: usize) -> Self {
        Self {
            kinetic: vec![T::zero(); cells],
            internal: vec![T::zero(); cells],
            convective_plus: vec![T::zero(); cells],
            convective_minus: vec![T::zero(); cells],
        }
    }

    /// Only internal-energy defect, spatially uniform.
    pub fn uniform_internal(cells: usize, value: T) -> Self {
        let mut d = Self::zero(cells);
        d.internal = vec![value; cells];
        d
    }

    /// Kinetic defect with the symmetric convective split `c+ = c- = C_kin`.
    pub fn from_kinetic_internal(kinetic: Vec<T>, internal: Vec<T>) -> Self {
        Self {
            convective_plus: kinetic.clone(),
            convective_minus: kinetic.clone(),
            kinetic,
            internal,
        }
    }

    pub fn check_shape(&self, grid: &Grid<T>) -> Result<(), StateError> {
        let fields = [
            ("kinetic", &self.kinetic),
            ("internal", &self.internal),
            ("convective_plus", &self.convective_plus),
            ("convective_minus", &self.convective_minus),
        ];
        for (field, v) in fields {
            if v.len() != grid.cells {
                return Err(StateError::LengthMismatch { field, got: v.len(), expected: grid.cells });
            }
            for (cell, &x) in v.iter().enumerate() {
                if !x.is_finite() {
                    return Err(StateError::NonFinite { field, cell });
                }
                if x < T::zero() {
                    return Err(StateError::Negative { field, cell, value: x.as_f64() });
                }
            }
        }
        let tol = T::of(1e-12);
        for cell in 0..grid.cells {
            let half = (self.convective_plus[cell] + self.convective_minus[cell]) / T::of(2.0);
            let k = self.kinetic[cell];
            if (half - k).abs() > tol * k.abs().max(half.abs()).max(T::min_positive_value()) {
                return Err(StateError::ConvectiveSplit { cell });
            }
        }
        Ok(())
    }

    /// `sum_i (C_kin,i + C_int,i) dx`.
    pub fn total(&self, grid: &Grid<T>) -> T {
        let s = self.kinetic.iter().zip(&self.internal).fold(T::zero(), |acc, (&k, &i)| acc + k + i);
        s * grid.dx()
    }
}

/// Relative weights of `rho`, `m`, `S` in the trajectory metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldWeights<T> {
    pub rho: T,
    pub momentum: T,
    pub entropy: T,
}

impl<T: Real> Default for FieldWeights<T> {
    fn default() -> Self {
        Self { rho: T::one(), momentum: T::one(), entropy: T::one() }
    }
}

/// Discrete negative-order norm `|v|_- = |(I - D_h)^{-1} v|_2`, where `D_h`
/// is the second-order Laplacian with reflecting ends.
#[derive(Debug, Clone)]
pub struct SmoothingNorm<T> {
    grid: Grid<T>,
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> SmoothingNorm<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let n = grid.cells;
        let k = T::one() / (grid.dx() * grid.dx());
        let mut lower = vec![-k; n];
        let mut upper = vec![-k; n];
        let mut diag = vec![T::one() + T::of(2.0) * k; n];
        lower[0] = T::zero();
        upper[n - 1] = T::zero();
        // reflecting ghost cell: v_{-1} = v_0, v_n = v_{n-1}
        diag[0] -= k;
        diag[n - 1] -= k;
        if n == 1 {
            diag[0] = T::one();
        }
        Self { grid, lower, diag, upper }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn smooth(&self, v: &[T]) -> Vec<T> {
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, v)
    }

    pub fn norm(&self, v: &[T]) -> T {
        let w = self.smooth(v);
        (w.iter().fold(T::zero(), |acc, &x| acc + x * x) * self.grid.dx()).sqrt()
    }

    /// Weighted sum of the three field norms of `a - b`.
    pub fn state_distance(&self, a: &FluidState<T>, b: &FluidState<T>, w: &FieldWeights<T>) -> T {
        let diff = |x: &[T], y: &[T]| x.iter().zip(y).map(|(p, q)| *p - *q).collect::<Vec<_>>();
        w.rho * self.norm(&diff(&a.rho, &b.rho))
            + w.momentum * self.norm(&diff(&a.momentum, &b.momentum))
            + w.entropy * self.norm(&diff(&a.entropy, &b.entropy))
    }
}
