//! Time integration of the modified Allen-Cahn flow.

mod duhamel;
mod steps;

pub use duhamel::{duhamel_solve, theta0, window_length, DUHAMEL_NODES_PER_WINDOW};
pub use steps::{
    explicit_dt_limit, solve_heat, step_discrete_gradient, step_discrete_gradient_with,
    step_explicit, step_explicit_with, step_imex, step_imex_with, HeatPropagator,
};

use serde::{Deserialize, Serialize};

use crate::domain::{Field, Grid, ImplicitDiffusion};
use crate::error::{Error, Result};
use crate::measures::{ledger_step, DiscrepancyAccumulator, DiscrepancyResult, EnergyLedger};
use crate::potential::{find_roots, PotentialContext};
use crate::schedule::Schedule;

/// Slack on top of the well location when checking the maximum principle.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Imex,
    Explicit,
    Duhamel,
    DiscreteGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `tanh((R0 - r) / eps)`, clamped strictly inside the wells.
    Interface(f64),
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// Defaults to the terminal time `|ln eps| / pi`.
    pub t_end: Option<f64>,
    pub scheme: Scheme,
    pub clamp_check: bool,
    /// Steps between stored snapshots; `0` keeps only the first and last.
    pub dump_every: usize,
    /// Switch the nonlinearity off (pure heat flow), for testing.
    pub reaction: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, scheme: Scheme) -> Self {
        Self {
            dt,
            t_end: None,
            scheme,
            clamp_check: true,
            dump_every: 0,
            reaction: true,
        }
    }

    /// Default step `eps^2 / 4`.
    pub fn default_dt(schedule: &Schedule) -> f64 {
        schedule.epsilon().powi(2) / 4.0
    }

    pub fn t_end(&self, schedule: &Schedule) -> f64 {
        self.t_end.unwrap_or_else(|| schedule.t_eps())
    }

    pub fn validate(&self, grid: &Grid, schedule: &Schedule) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let t_end = self.t_end(schedule);
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        if self.scheme == Scheme::Explicit {
            let limit = explicit_dt_limit(grid);
            if self.dt > limit {
                return Err(Error::InvalidArgument(format!(
                    "explicit scheme needs dt <= h^2 / (2 (N + 1)) = {limit}, got {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

/// Per-step record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub max_abs_v: f64,
    pub min_xi_density: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub eps: f64,
    pub snapshots: Vec<Field>,
    pub ledger: EnergyLedger,
    /// Ledger after every step, starting with the initial state.
    pub ledger_history: Vec<EnergyLedger>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub discrepancy: DiscrepancyAccumulator,
    pub final_field: Field,
    pub steps: usize,
}

impl Trajectory {
    pub fn max_abs_v(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.max_abs_v)
            .fold(0.0, f64::max)
    }

    pub fn discrepancy_result(&self, schedule: &Schedule) -> DiscrepancyResult {
        DiscrepancyResult::from_accumulator(&self.discrepancy, schedule)
    }
}

/// Accumulates everything a trajectory records as steps arrive.
pub(crate) struct Recorder<'a> {
    schedule: &'a Schedule,
    dump_every: usize,
    bound: Option<f64>,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(
        initial: &Field,
        schedule: &'a Schedule,
        dump_every: usize,
        bound: Option<f64>,
    ) -> Result<Self> {
        if let Some(bound) = bound {
            let m = initial.max_abs();
            if m > bound {
                return Err(Error::MaxPrincipleViolation {
                    t: initial.time,
                    max_abs_v: m,
                    bound,
                });
            }
        }
        let ledger = EnergyLedger::start(initial, schedule);
        let discrepancy = DiscrepancyAccumulator::start(initial, schedule);
        let diag = StepDiagnostics {
            t: initial.time,
            max_abs_v: initial.max_abs(),
            min_xi_density: discrepancy.min_xi_density,
        };
        Ok(Self {
            schedule,
            dump_every,
            bound,
            traj: Trajectory {
                eps: schedule.epsilon(),
                snapshots: vec![initial.clone()],
                ledger,
                ledger_history: vec![ledger],
                diagnostics: vec![diag],
                discrepancy,
                final_field: initial.clone(),
                steps: 0,
            },
        })
    }

    pub(crate) fn push(&mut self, next: Field) -> Result<()> {
        let t = &mut self.traj;
        let prev = &t.final_field;
        t.ledger = ledger_step(&t.ledger, prev, &next, self.schedule);
        t.ledger_history.push(t.ledger);
        let before = t.discrepancy.min_xi_density;
        t.discrepancy.min_xi_density = f64::INFINITY;
        t.discrepancy.step(prev, &next, self.schedule);
        let step_min = t.discrepancy.min_xi_density;
        t.discrepancy.min_xi_density = before.min(step_min);
        let max_abs_v = next.max_abs();
        t.diagnostics.push(StepDiagnostics {
            t: next.time,
            max_abs_v,
            min_xi_density: step_min,
        });
        t.steps += 1;
        if self.dump_every > 0 && t.steps.is_multiple_of(self.dump_every) {
            t.snapshots.push(next.clone());
        }
        t.final_field = next;
        if let Some(bound) = self.bound {
            if max_abs_v > bound {
                return Err(Error::MaxPrincipleViolation {
                    t: t.final_field.time,
                    max_abs_v,
                    bound,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn current(&self) -> &Field {
        &self.traj.final_field
    }

    pub(crate) fn push_snapshot(&mut self) {
        let last = self.traj.snapshots.last().map(|f| f.time);
        if last != Some(self.traj.final_field.time) {
            self.traj.snapshots.push(self.traj.final_field.clone());
        }
    }

    pub(crate) fn finish(mut self) -> Trajectory {
        self.push_snapshot();
        self.traj
    }
}

/// `alpha_eps(t_eps)`, the upper well at the terminal time.
pub fn terminal_well(schedule: &Schedule) -> Result<f64> {
    let ctx = PotentialContext::new(schedule, schedule.t_eps())?;
    Ok(find_roots(&ctx)?.alpha())
}

/// Maximum-principle bound `alpha_eps(t_eps) + 1e-6`.
pub fn max_principle_bound(schedule: &Schedule) -> Result<f64> {
    Ok(terminal_well(schedule)? + MAX_PRINCIPLE_TOL)
}

/// Largest magnitude allowed for initial data, strictly inside the wells.
pub fn admissible_amplitude(schedule: &Schedule) -> Result<f64> {
    Ok(terminal_well(schedule)? * (1.0 - 1e-12))
}

pub fn initial_datum(grid: &Grid, schedule: &Schedule, profile: Profile) -> Result<Field> {
    let amp = admissible_amplitude(schedule)?;
    match profile {
        Profile::Interface(r0) => {
            if !(r0 > 0.0 && r0 < grid.r_max() / 2.0) {
                return Err(Error::InvalidArgument(format!(
                    "interface radius must lie in (0, r_max/2) = (0, {}), got {r0}",
                    grid.r_max() / 2.0
                )));
            }
            let e = schedule.width(0.0);
            Ok(Field::from_fn(grid, 0.0, |r| {
                ((r0 - r) / e).tanh().clamp(-amp, amp)
            }))
        }
        Profile::Constant(c) => {
            let well = terminal_well(schedule)?;
            if !(c.is_finite() && c.abs() <= well) {
                return Err(Error::InvalidArgument(format!(
                    "constant initial value must satisfy |c| <= {well}, got {c}"
                )));
            }
            Ok(Field::constant(grid, 0.0, c))
        }
    }
}

/// Integrate from `initial` to the configured end time.
pub fn run_mac(cfg: &SolverConfig, initial: &Field, schedule: &Schedule) -> Result<Trajectory> {
    cfg.validate(&initial.grid, schedule)?;
    let t_end = cfg.t_end(schedule);
    let bound = if cfg.clamp_check {
        Some(max_principle_bound(schedule)?)
    } else {
        None
    };
    if cfg.scheme == Scheme::Duhamel {
        return duhamel::duhamel_run(
            initial,
            schedule,
            t_end,
            cfg.dump_every,
            bound,
            cfg.reaction,
        );
    }
    let mut rec = Recorder::new(initial, schedule, cfg.dump_every, bound)?;
    let grid = initial.grid.clone();
    let full = ImplicitDiffusion::new(&grid, cfg.dt);
    // accumulated rounding in the clock must not produce a sliver step
    let slack = 1e-8 * cfg.dt;
    loop {
        let cur = rec.current();
        let remaining = t_end - cur.time;
        if remaining <= slack {
            break;
        }
        let dt = if remaining <= cfg.dt + slack {
            remaining
        } else {
            cfg.dt
        };
        let next = match cfg.scheme {
            Scheme::Imex => {
                if dt == cfg.dt {
                    steps::imex_with(cur, schedule, dt, &full, cfg.reaction)?
                } else {
                    step_imex_with(cur, schedule, dt, cfg.reaction)?
                }
            }
            Scheme::Explicit => step_explicit_with(cur, schedule, dt, cfg.reaction)?,
            Scheme::DiscreteGradient => {
                step_discrete_gradient_with(cur, schedule, dt, cfg.reaction)?
            }
            Scheme::Duhamel => unreachable!("handled above"),
        };
        rec.push(next)?;
    }
    Ok(rec.finish())
}
