//! Run configuration: a flat JSON object, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::solver::{Profile, Scheme, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    One(f64),
    Many(Vec<f64>),
}

impl EpsSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsSpec::One(e) => vec![*e],
            EpsSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams {
    #[serde(rename = "T")]
    pub extinction: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        Self {
            extinction: 1.0,
            m: 1.0,
        }
    }
}

fn default_n() -> usize {
    1
}

fn default_profile() -> Profile {
    Profile::Interface(1.0)
}

fn default_scheme() -> Scheme {
    Scheme::Imex
}

fn default_cells_per_eps() -> f64 {
    16.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eps: EpsSpec,
    /// Ambient dimension minus one; `0` selects a line grid.
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    /// Explicit grid; when absent `r_max = 2 (R0 + 15 eps)` and
    /// `n_cells = ceil(cells_per_eps * r_max / eps)`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_cells_per_eps")]
    pub cells_per_eps: f64,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_true")]
    pub clamp_check: bool,
    #[serde(default)]
    pub dump_every: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Fill the sweep's `runtime_seconds` column (breaks byte-identical output).
    #[serde(default)]
    pub record_runtime: bool,
    #[serde(default)]
    pub barrier: BarrierParams,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Minimal configuration for one `eps`.
    pub fn single(eps: f64) -> Self {
        Self {
            eps: EpsSpec::One(eps),
            n: 1,
            grid: None,
            cells_per_eps: default_cells_per_eps(),
            profile: default_profile(),
            scheme: default_scheme(),
            dt: None,
            t_end: None,
            clamp_check: true,
            dump_every: 0,
            seed: 0,
            output_dir: None,
            record_runtime: false,
            barrier: BarrierParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.eps.values();
        if eps.is_empty() {
            return Err(Error::Config("eps list is empty".into()));
        }
        for &e in &eps {
            let schedule = Schedule::new(e)?;
            let grid = self.grid_for(e)?;
            let solver = self.solver_for(&schedule);
            solver.validate(&grid, &schedule)?;
            crate::solver::initial_datum(&grid, &schedule, self.profile)?;
        }
        if !(self.cells_per_eps > 0.0 && self.cells_per_eps.is_finite()) {
            return Err(Error::Config(format!(
                "cells_per_eps must be positive, got {}",
                self.cells_per_eps
            )));
        }
        Ok(())
    }

    fn profile_radius(&self) -> f64 {
        match self.profile {
            Profile::Interface(r0) => r0,
            Profile::Constant(_) => 1.0,
        }
    }

    pub fn grid_for(&self, eps: f64) -> Result<Grid> {
        let (r_max, n_cells) = match self.grid {
            Some(g) => (g.r_max, g.n_cells),
            None => {
                let r_max = 2.0 * (self.profile_radius() + 15.0 * eps);
                (r_max, (self.cells_per_eps * r_max / eps).ceil() as usize)
            }
        };
        if self.n == 0 {
            Grid::line(r_max, n_cells)
        } else {
            Grid::radial(self.n, r_max, n_cells)
        }
    }

    pub fn solver_for(&self, schedule: &Schedule) -> SolverConfig {
        SolverConfig {
            dt: self
                .dt
                .unwrap_or_else(|| SolverConfig::default_dt(schedule)),
            t_end: self.t_end,
            scheme: self.scheme,
            clamp_check: self.clamp_check,
            dump_every: self.dump_every,
            reaction: true,
        }
    }
}
