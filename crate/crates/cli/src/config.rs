use std::path::Path;

use euler_semiflow::selection::{default_beta_family, Alpha, SelectionParams};
use euler_semiflow::solver::{density_bump, smooth_pulse, Primitive, RiemannDatum, RiemannProblem, SchemeConfig, SchemeKind};
use euler_semiflow::{FluidState, GasConstants, Grid, InitialDatum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub gas: GasSection,
    pub grid: GridSection,
    pub scheme: SchemeSection,
    pub datum: DatumSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    /// Lower bound of the specific entropy.
    pub s0: f64,
}

impl Default for GasSection {
    fn default() -> Self {
        Self { gamma: 1.4, s0: -1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub cells: usize,
    #[serde(default = "one")]
    pub length: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "all_kinds")]
    pub kinds: Vec<SchemeKind>,
    #[serde(default = "zero_eps")]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    pub dt_out: f64,
}

fn all_kinds() -> Vec<SchemeKind> {
    SchemeKind::all().to_vec()
}

fn zero_eps() -> Vec<f64> {
    vec![0.0]
}

fn default_cfl() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSection {
    /// Constant state at rest with density `rho` and specific entropy `s`.
    Equilibrium {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        s: f64,
        energy: Option<f64>,
    },
    Bump {
        amplitude: f64,
        #[serde(default)]
        s: f64,
        energy: Option<f64>,
    },
    Pulse {
        amplitude: f64,
        width: f64,
        energy: Option<f64>,
    },
    Sod,
    /// `(rho, u, p)` on each side of the midpoint.
    Riemann { left: [f64; 3], right: [f64; 3] },
    /// JSON `{"rho": [...], "momentum": [...], "entropy": [...]}`.
    File { path: String, energy: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    pub lambda0: f64,
    pub zeta: f64,
    pub n_funcs: usize,
    pub alpha: Alpha,
    pub x_scale: f64,
    pub modes: usize,
    pub tie_tol: f64,
}

impl Default for SelectionSection {
    fn default() -> Self {
        let p = SelectionParams::<f64>::default();
        Self { lambda0: p.lambda0, zeta: p.zeta, n_funcs: p.n_funcs, alpha: p.alpha, x_scale: p.x_scale, modes: 3, tie_tol: p.tie_tol }
    }
}

impl SelectionSection {
    pub fn params(&self) -> SelectionParams<f64> {
        SelectionParams {
            lambda0: self.lambda0,
            zeta: self.zeta,
            n_funcs: self.n_funcs,
            alpha: self.alpha,
            x_scale: self.x_scale,
            beta_family: default_beta_family(self.modes),
            tie_tol: self.tie_tol,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
}

pub fn read(path: &Path) -> Result<(Config, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let config: Config = toml::from_str(text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok((config, bytes))
}

impl Config {
    pub fn gas(&self) -> Result<GasConstants<f64>, CliError> {
        Ok(GasConstants::new(self.gas.gamma).map_err(|e| CliError::Parse(e.to_string()))?.with_entropy_floor(self.gas.s0))
    }

    pub fn grid(&self) -> Result<Grid<f64>, CliError> {
        Grid::new(self.grid.cells, self.grid.length).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn suite(&self) -> Result<Vec<SchemeConfig<f64>>, CliError> {
        if self.scheme.kinds.is_empty() || self.scheme.epsilon.is_empty() {
            return Err(CliError::Parse("[scheme] needs at least one kind and one epsilon".into()));
        }
        let s = &self.scheme;
        let mut out = Vec::new();
        for &eps in &s.epsilon {
            for &kind in &s.kinds {
                let cfg = SchemeConfig::new(kind, self.grid.cells, self.grid.length, s.t_end, s.dt_out).with_epsilon(eps).with_cfl(s.cfl);
                cfg.output_steps().map_err(|e| CliError::Parse(e.to_string()))?;
                out.push(cfg);
            }
        }
        Ok(out)
    }

    /// The Riemann problem for the `sod` and `riemann` presets.
    pub fn riemann_problem(&self) -> Result<Option<RiemannProblem<f64>>, CliError> {
        let datum = match &self.datum {
            DatumSection::Sod => RiemannDatum::sod(),
            DatumSection::Riemann { left, right } => RiemannDatum::new(
                Primitive::new(left[0], left[1], left[2]),
                Primitive::new(right[0], right[1], right[2]),
            )
            .map_err(|e| CliError::Parse(e.to_string()))?,
            _ => return Ok(None),
        };
        Ok(Some(RiemannProblem::centered(datum, self.grid()?)))
    }

    pub fn datum(&self, base: &Path) -> Result<InitialDatum<f64>, CliError> {
        let gas = self.gas()?;
        let grid = self.grid()?;
        let n = grid.cells;
        let (state, energy) = match &self.datum {
            DatumSection::Equilibrium { rho, s, energy } => (FluidState::uniform(n, *rho, 0.0, rho * s), *energy),
            DatumSection::Bump { amplitude, s, energy } => (density_bump(&grid, *amplitude, *s), *energy),
            DatumSection::Pulse { amplitude, width, energy } => (smooth_pulse(&grid, *amplitude, *width), *energy),
            DatumSection::Sod | DatumSection::Riemann { .. } => {
                let problem = self.riemann_problem()?.expect("riemann preset");
                return problem.initial_datum(&gas).map_err(|e| CliError::Parse(e.to_string()));
            }
            DatumSection::File { path, energy } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", full.display())))?;
                let state: FluidState<f64> = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", full.display())))?;
                (state, *energy)
            }
        };
        let datum = match energy {
            Some(e) => InitialDatum::new(state, e, &grid, &gas),
            None => InitialDatum::tight(state, &grid, &gas),
        };
        datum.map_err(|e| CliError::Parse(e.to_string()))
    }
}
