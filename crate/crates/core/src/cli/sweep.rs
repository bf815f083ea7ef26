//! Concurrent eps-sweeps of the time-integrated discrepancy and rate fits.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::measures::DiscrepancyResult;
use crate::schedule::Schedule;
use crate::solver::{initial_datum, run_mac};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub result: Option<DiscrepancyResult>,
    pub error: Option<String>,
    pub runtime_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// `a` in `D ~ a / |ln eps|`, least squares through the origin.
    pub coefficient: f64,
    /// Root-mean-square deviation from the fitted line.
    pub residual: f64,
    /// Slope of `ln D` against `ln(1 / |ln eps|)`; `None` with fewer than two positive `D`.
    pub loglog_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    /// Sorted by decreasing `eps`.
    pub rows: Vec<SweepRow>,
    pub fit: RateFit,
    /// `max D |ln eps| <= 2 x` its value at the largest `eps`.
    pub bounded_flag: bool,
}

pub fn run_row(cfg: &RunConfig, eps: f64) -> Result<DiscrepancyResult> {
    let schedule = Schedule::new(eps)?;
    let grid = cfg.grid_for(eps)?;
    let initial = initial_datum(&grid, &schedule, cfg.profile)?;
    let mut solver = cfg.solver_for(&schedule);
    solver.dump_every = 0;
    let traj = run_mac(&solver, &initial, &schedule)?;
    Ok(traj.discrepancy_result(&schedule))
}

pub fn fit_rate(rows: &[SweepRow]) -> RateFit {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            r.result.map(|d| {
                (
                    1.0 / Schedule::new(r.eps)
                        .map(|s| s.log_eps_abs())
                        .unwrap_or(f64::NAN),
                    d.d,
                )
            })
        })
        .filter(|(x, d)| x.is_finite() && d.is_finite())
        .collect();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, d)| x * d).sum();
    let coefficient = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residual = if pts.is_empty() {
        0.0
    } else {
        (pts.iter()
            .map(|(x, d)| (d - coefficient * x).powi(2))
            .sum::<f64>()
            / pts.len() as f64)
            .sqrt()
    };
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|(x, d)| (x.ln(), d.ln()))
        .collect();
    let loglog_slope = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    RateFit {
        coefficient,
        residual,
        loglog_slope,
    }
}

pub fn bounded_flag(rows: &[SweepRow]) -> bool {
    let ok: Vec<&DiscrepancyResult> = rows.iter().filter_map(|r| r.result.as_ref()).collect();
    let Some(first) = ok.first() else {
        return false;
    };
    let reference = first.d_times_logeps;
    let max = ok
        .iter()
        .map(|d| d.d_times_logeps)
        .fold(f64::NEG_INFINITY, f64::max);
    max <= 2.0 * reference.max(0.0) || max <= 0.0
}

/// Runs every `eps` of the configuration on a pool of `jobs` threads. Failed
/// rows are recorded and the sweep continues.
pub fn run_sweep(cfg: &RunConfig, jobs: usize) -> Result<SweepReport> {
    let mut eps = cfg.eps.values();
    eps.sort_by(|a, b| b.partial_cmp(a).expect("validated eps are finite"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        eps.par_iter()
            .map(|&e| {
                let start = Instant::now();
                let res = run_row(cfg, e);
                let runtime = cfg.record_runtime.then(|| start.elapsed().as_secs_f64());
                match res {
                    Ok(d) => SweepRow {
                        eps: e,
                        result: Some(d),
                        error: None,
                        runtime_seconds: runtime,
                    },
                    Err(err) => SweepRow {
                        eps: e,
                        result: None,
                        error: Some(err.to_string()),
                        runtime_seconds: runtime,
                    },
                }
            })
            .collect()
    });
    let fit = fit_rate(&rows);
    let bounded_flag = bounded_flag(&rows);
    Ok(SweepReport {
        rows,
        fit,
        bounded_flag,
    })
}
