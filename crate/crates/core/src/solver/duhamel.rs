//! Mild-solution solver: on short windows the solution is the heat flow of the
//! window's initial value plus the heat-propagated nonlinearity, found by
//! Picard iteration.

use std::f64::consts::{E, SQRT_2};

use super::steps::HeatPropagator;
use super::{Recorder, Trajectory};
use crate::domain::Field;
use crate::error::{Error, Result};
use crate::potential::{chi_dot, phi, PotentialContext};
use crate::schedule::Schedule;

pub const DUHAMEL_NODES_PER_WINDOW: usize = 16;
const PICARD_TOL: f64 = 1e-10;
const PICARD_MAX_ITER: usize = 50;
const GROWTH_LIMIT: usize = 3;

/// Window constant with `1 / theta0 = sqrt(2 (1 + sqrt 2)) (1 + 1/e)`.
pub fn theta0() -> f64 {
    let s = (2.0 * (1.0 + SQRT_2)).sqrt();
    1.0 / (s * (1.0 + 1.0 / E))
}

/// Window length `theta0 eps^2`.
pub fn window_length(schedule: &Schedule) -> f64 {
    theta0() * schedule.epsilon().powi(2)
}

/// Source term `-chi_dot((v^2 - 1)^2) phi(v)` at one node.
fn source(values: &[f64], ctx: &PotentialContext, reaction: bool) -> Vec<f64> {
    if !reaction {
        return vec![0.0; values.len()];
    }
    values
        .iter()
        .map(|&v| {
            let s = v * v - 1.0;
            -chi_dot(s * s) * phi(v, ctx)
        })
        .collect()
}

/// Node values `V_0 .. V_m` of one window, `V_0` being the window's initial value.
fn solve_window(
    start: &[f64],
    t0: f64,
    len: f64,
    grid: &crate::domain::Grid,
    schedule: &Schedule,
    reaction: bool,
    window: usize,
) -> Result<Vec<Vec<f64>>> {
    let m = DUHAMEL_NODES_PER_WINDOW;
    let ds = len / m as f64;
    let heat = HeatPropagator::new(grid, ds);
    let ctxs: Vec<PotentialContext> = (0..m)
        .map(|k| PotentialContext::new(schedule, t0 + k as f64 * ds))
        .collect::<Result<_>>()?;

    // zeroth iterate: heat flow alone
    let mut prev = Vec::with_capacity(m + 1);
    prev.push(start.to_vec());
    for k in 1..=m {
        let mut x = prev[k - 1].clone();
        heat.apply_in_place(&mut x);
        prev.push(x);
    }

    let mut changes = Vec::new();
    let mut growth = 0;
    for _ in 0..PICARD_MAX_ITER {
        let mut next = Vec::with_capacity(m + 1);
        next.push(start.to_vec());
        for k in 1..=m {
            let src = source(&prev[k - 1], &ctxs[k - 1], reaction);
            let mut x: Vec<f64> = next[k - 1]
                .iter()
                .zip(src.iter())
                .map(|(v, s)| v + ds * s)
                .collect();
            heat.apply_in_place(&mut x);
            if let Some(cell) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    t: t0 + k as f64 * ds,
                    cell,
                });
            }
            next.push(x);
        }
        let change = next
            .iter()
            .zip(prev.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if let Some(&last) = changes.last() {
            if change > last {
                growth += 1;
            } else {
                growth = 0;
            }
        }
        changes.push(change);
        prev = next;
        if growth >= GROWTH_LIMIT {
            return Err(Error::FixedPointDivergence { window, changes });
        }
        if change < PICARD_TOL {
            break;
        }
    }
    Ok(prev)
}

pub(crate) fn duhamel_run(
    initial: &Field,
    schedule: &Schedule,
    t_end: f64,
    dump_every: usize,
    bound: Option<f64>,
    reaction: bool,
) -> Result<Trajectory> {
    let t1 = window_length(schedule);
    let mut rec = Recorder::new(initial, schedule, dump_every, bound)?;
    let grid = initial.grid.clone();
    let mut window = 0;
    loop {
        let cur = rec.current().clone();
        let remaining = t_end - cur.time;
        if remaining <= 1e-8 * t1 {
            break;
        }
        let len = if remaining <= t1 * (1.0 + 1e-8) {
            remaining
        } else {
            t1
        };
        let nodes = solve_window(
            &cur.values,
            cur.time,
            len,
            &grid,
            schedule,
            reaction,
            window,
        )?;
        let ds = len / DUHAMEL_NODES_PER_WINDOW as f64;
        for (k, values) in nodes.into_iter().enumerate().skip(1) {
            rec.push(Field {
                grid: grid.clone(),
                values,
                time: cur.time + k as f64 * ds,
            })?;
        }
        window += 1;
    }
    Ok(rec.finish())
}

/// Run `windows` consecutive windows of length `theta0 eps^2`, keeping one
/// snapshot per window.
pub fn duhamel_solve(initial: &Field, schedule: &Schedule, windows: usize) -> Result<Trajectory> {
    if windows == 0 {
        return Err(Error::InvalidArgument(
            "at least one window is required".into(),
        ));
    }
    let t_end = initial.time + windows as f64 * window_length(schedule);
    duhamel_run(
        initial,
        schedule,
        t_end,
        DUHAMEL_NODES_PER_WINDOW,
        None,
        true,
    )
}
