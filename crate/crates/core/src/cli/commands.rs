//! Subcommand bodies. Each returns the process exit code.

use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::config::RunConfig;
use super::output::{num, opt_num, write_csv, write_json};
use super::sweep::run_sweep;
use crate::barrier::{
    barrier_w, check_comparison_signed, t2_residual, verify_subsolution, BarrierSpec,
    ComparisonReport, SubsolutionReport,
};
use crate::domain::{Field, Grid};
use crate::error::{Error, Result};
use crate::mcf::{radius_error, RadiusLaw, RadiusReport};
use crate::measures::{alt_energy_residual, energy_residual, DiscrepancyResult, EnergyLedger};
use crate::potential::{
    bracket_report, find_roots, verify_sign_structure, BracketReport, PotentialContext, RootPair,
    SignReport,
};
use crate::schedule::Schedule;
use crate::solver::{
    admissible_amplitude, initial_datum, max_principle_bound, run_mac, Profile, Scheme, Trajectory,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MAX_PRINCIPLE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Exit code for an error raised while a run is in progress.
pub fn run_exit_code(err: &Error) -> i32 {
    match err {
        Error::MaxPrincipleViolation { .. } => EXIT_MAX_PRINCIPLE,
        Error::Io(_) | Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn single_eps(cfg: &RunConfig) -> Result<f64> {
    match cfg.eps.values().as_slice() {
        [e] => Ok(*e),
        v => Err(Error::Config(format!(
            "this command needs a single eps, got {} values (use sweep)",
            v.len()
        ))),
    }
}

fn prepare(cfg: &RunConfig) -> Result<(Schedule, Grid, Field)> {
    let eps = single_eps(cfg)?;
    let schedule = Schedule::new(eps)?;
    let grid = cfg.grid_for(eps)?;
    let initial = initial_datum(&grid, &schedule, cfg.profile)?;
    Ok((schedule, grid, initial))
}

#[derive(Serialize)]
struct RunSummary {
    eps: f64,
    scheme: Scheme,
    n_cells: usize,
    dt: f64,
    t_end: f64,
    steps: usize,
    max_abs_v: f64,
    max_principle_bound: f64,
    ledger: Option<EnergyLedger>,
    energy_residual: Option<f64>,
    alt_energy_residual: Option<f64>,
    discrepancy: Option<DiscrepancyResult>,
    violations: Vec<String>,
    error: Option<String>,
}

fn write_snapshots(out: &Path, traj: &Trajectory) -> Result<()> {
    let dir = out.join("snapshots");
    std::fs::create_dir_all(&dir)?;
    for (i, f) in traj.snapshots.iter().enumerate() {
        f.write_csv(dir.join(format!("t_{i}.csv")))?;
    }
    Ok(())
}

pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let (schedule, grid, initial) = prepare(cfg)?;
    let solver = cfg.solver_for(&schedule);
    let bound = max_principle_bound(&schedule)?;
    let result = run_mac(&solver, &initial, &schedule);
    std::fs::create_dir_all(out)?;
    let mut summary = RunSummary {
        eps: schedule.epsilon(),
        scheme: solver.scheme,
        n_cells: grid.n_cells(),
        dt: solver.dt,
        t_end: solver.t_end(&schedule),
        steps: 0,
        max_abs_v: initial.max_abs(),
        max_principle_bound: bound,
        ledger: None,
        energy_residual: None,
        alt_energy_residual: None,
        discrepancy: None,
        violations: Vec::new(),
        error: None,
    };
    let code = match result {
        Ok(traj) => {
            summary.steps = traj.steps;
            summary.max_abs_v = traj.max_abs_v();
            summary.ledger = Some(traj.ledger);
            summary.energy_residual = Some(energy_residual(&traj.ledger));
            summary.alt_energy_residual = Some(alt_energy_residual(&traj.ledger));
            summary.discrepancy = Some(traj.discrepancy_result(&schedule));
            if solver.dump_every > 0 {
                write_snapshots(out, &traj)?;
            }
            EXIT_OK
        }
        Err(e) => {
            if let Error::MaxPrincipleViolation { .. } = e {
                summary.violations.push(e.to_string());
            }
            summary.error = Some(e.to_string());
            run_exit_code(&e)
        }
    };
    write_json(&out.join("summary.json"), &summary)?;
    if let Some(e) = &summary.error {
        eprintln!("run failed: {e}");
    } else {
        println!(
            "eps {} steps {} max|v| {} energy residual {}",
            summary.eps,
            summary.steps,
            summary.max_abs_v,
            summary.energy_residual.map(num).unwrap_or_default()
        );
    }
    Ok(code)
}

pub fn cmd_sweep(cfg: &RunConfig, jobs: usize, out: &Path) -> Result<i32> {
    let report = run_sweep(cfg, jobs)?;
    std::fs::create_dir_all(out)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let d = r.result;
            vec![
                num(r.eps),
                opt_num(d.map(|d| d.d)),
                opt_num(d.map(|d| d.d_times_logeps)),
                opt_num(d.map(|d| d.min_xi_density)),
                opt_num(r.runtime_seconds),
            ]
        })
        .collect();
    write_csv(
        &out.join("sweep.csv"),
        &[
            "eps",
            "D",
            "D_times_logeps",
            "min_xi_density",
            "runtime_seconds",
        ],
        &rows,
    )?;
    write_json(&out.join("summary.json"), &report)?;
    for r in &report.rows {
        match (&r.result, &r.error) {
            (Some(d), _) => println!(
                "eps {:<8} D {:<24} D*|ln eps| {}",
                r.eps, d.d, d.d_times_logeps
            ),
            (None, Some(e)) => println!("eps {:<8} failed: {e}", r.eps),
            _ => {}
        }
    }
    println!(
        "fit D = {} / |ln eps| (rms {}), log-log slope {}, bounded {}",
        report.fit.coefficient,
        report.fit.residual,
        report
            .fit
            .loglog_slope
            .map(num)
            .unwrap_or_else(|| "n/a".into()),
        report.bounded_flag
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PotentialRow {
    eps: f64,
    t: f64,
    roots: RootPair,
    signs: SignReport,
    brackets: BracketReport,
}

/// Roots, sign structure and bracket status at `t = 0, t_eps/2, t_eps`.
pub fn cmd_verify_potential(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let mut rows = Vec::new();
    let mut all_ok = true;
    for eps in cfg.eps.values() {
        let s = Schedule::new(eps)?;
        for t in [0.0, 0.5 * s.t_eps(), s.t_eps()] {
            let ctx = PotentialContext::new(&s, t)?;
            let roots = find_roots(&ctx)?;
            let signs = verify_sign_structure(&ctx, &roots, 1000);
            all_ok &= roots.is_ordered() && signs.all_ok;
            rows.push(PotentialRow {
                eps,
                t,
                roots,
                brackets: bracket_report(&ctx, &roots),
                signs,
            });
        }
    }
    std::fs::create_dir_all(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.eps),
                num(r.t),
                num(r.roots.log_delta),
                num(r.roots.log_eta),
                num(r.roots.alpha()),
                num(r.roots.beta()),
                r.signs.all_ok.to_string(),
                r.brackets.stated.delta_in_bracket.to_string(),
                r.brackets.derived.delta_in_bracket.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("roots.csv"),
        &[
            "eps",
            "t",
            "log_delta",
            "log_eta",
            "alpha",
            "beta",
            "sign_structure_ok",
            "stated_gap_bracket",
            "derived_gap_bracket",
        ],
        &table,
    )?;
    write_json(&out.join("summary.json"), &rows)?;
    for r in &rows {
        println!(
            "eps {:<6} t {:<20} ln(1-alpha) {:<22} ln(beta-1) {:<22} signs {}",
            r.eps, r.t, r.roots.log_delta, r.roots.log_eta, r.signs.all_ok
        );
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn cmd_verify_energy(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let (schedule, _grid, initial) = prepare(cfg)?;
    let solver = cfg.solver_for(&schedule);
    let traj = match run_mac(&solver, &initial, &schedule) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("run failed: {e}");
            return Ok(run_exit_code(&e));
        }
    };
    std::fs::create_dir_all(out)?;
    let rows: Vec<Vec<String>> = traj
        .ledger_history
        .iter()
        .map(|l| {
            vec![
                num(l.t),
                num(l.term_time_deriv),
                num(l.term_mu_t),
                num(l.term_xi),
                num(l.term_g),
                num(energy_residual(l)),
                num(alt_energy_residual(l)),
            ]
        })
        .collect();
    write_csv(
        &out.join("energy.csv"),
        &[
            "t",
            "term_time_deriv",
            "term_mu_t",
            "term_xi",
            "term_G",
            "residual",
            "alt_residual",
        ],
        &rows,
    )?;
    #[derive(Serialize)]
    struct EnergySummary {
        eps: f64,
        scheme: Scheme,
        ledger: EnergyLedger,
        residual: f64,
        alt_residual: f64,
        discrepancy: DiscrepancyResult,
    }
    let summary = EnergySummary {
        eps: schedule.epsilon(),
        scheme: solver.scheme,
        ledger: traj.ledger,
        residual: energy_residual(&traj.ledger),
        alt_residual: alt_energy_residual(&traj.ledger),
        discrepancy: traj.discrepancy_result(&schedule),
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "energy residual {} (alternative weights {})",
        summary.residual, summary.alt_residual
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct BarrierOutcome {
    pub eps: f64,
    #[serde(rename = "T")]
    pub extinction: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub t2: f64,
    pub t2_residual: f64,
    pub min_v_minus_w: f64,
    pub region_checks_passed: bool,
    pub comparison: ComparisonReport,
    /// The same harness on the mirrored data `-w0`, checking `v <= -w`.
    pub mirrored: ComparisonReport,
    pub subsolution_max_operator: f64,
    pub subsolution: SubsolutionReport,
}

impl BarrierOutcome {
    pub fn hard_ok(&self, tol: f64) -> bool {
        self.min_v_minus_w >= -tol
            && self.mirrored.min_v_minus_w >= -tol
            && self.region_checks_passed
            && self.t2_residual.abs() <= 1e-12
    }
}

/// Runs the flow from the clamped barrier and checks domination up to `t2`.
pub fn barrier_experiment(
    cfg: &RunConfig,
    eps: f64,
    extinction: f64,
    m: f64,
) -> Result<BarrierOutcome> {
    let schedule = Schedule::new(eps)?;
    let spec = BarrierSpec::new(extinction, m, &schedule)?;
    let grid = match cfg.grid {
        Some(g) => Grid::radial(cfg.n.max(1), g.r_max, g.n_cells)?,
        None => {
            let r_max = 2.0 * (2.0 * extinction.sqrt() + 15.0 * eps);
            Grid::radial(
                cfg.n.max(1),
                r_max,
                (cfg.cells_per_eps * r_max / eps).ceil() as usize,
            )?
        }
    };
    let amp = admissible_amplitude(&schedule)?;
    let mut solver = cfg.solver_for(&schedule);
    solver.t_end = Some(spec.t2);
    solver.dump_every = solver.dump_every.max(1);
    let mut runs = Vec::new();
    for sign in [1.0, -1.0] {
        let mut w0 = Vec::with_capacity(grid.n_cells());
        for &r in grid.centers() {
            w0.push(sign * barrier_w(r, 0.0, extinction, &schedule)?.clamp(-amp, amp));
        }
        let initial = Field::new(grid.clone(), w0, 0.0)?;
        let traj = run_mac(&solver, &initial, &schedule)?;
        runs.push(check_comparison_signed(
            &traj, &spec, &schedule, 1e-4, sign,
        )?);
    }
    let mirrored = runs.pop().expect("two runs");
    let comparison = runs.pop().expect("two runs");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let r_hi = 2.0 * extinction.sqrt() + 4.0 * schedule.width(spec.t2);
    let samples: Vec<(f64, f64)> = (0..100)
        .map(|_| (rng.gen_range(0.01..r_hi), rng.gen_range(0.0..spec.t2)))
        .collect();
    let subsolution = verify_subsolution(&spec, &schedule, cfg.n.max(1), &samples, 1e-4)?;
    Ok(BarrierOutcome {
        eps,
        extinction,
        m,
        t2: spec.t2,
        t2_residual: t2_residual(spec.t2, extinction, m, &schedule),
        min_v_minus_w: comparison.min_v_minus_w,
        region_checks_passed: comparison.region_checks.iter().all(|c| c.ok)
            && mirrored.region_checks.iter().all(|c| c.ok),
        subsolution_max_operator: subsolution.max_operator,
        comparison,
        mirrored,
        subsolution,
    })
}

pub fn cmd_compare_barrier(
    cfg: &RunConfig,
    eps: Option<f64>,
    extinction: Option<f64>,
    m: Option<f64>,
    out: &Path,
) -> Result<i32> {
    let eps = match eps {
        Some(e) => e,
        None => single_eps(cfg)?,
    };
    let outcome = match barrier_experiment(
        cfg,
        eps,
        extinction.unwrap_or(cfg.barrier.extinction),
        m.unwrap_or(cfg.barrier.m),
    ) {
        Ok(o) => o,
        Err(
            e @ (Error::NoSolution { .. } | Error::InvalidArgument(_) | Error::InvalidEpsilon(_)),
        ) => {
            eprintln!("{e}");
            return Ok(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            return Ok(run_exit_code(&e));
        }
    };
    std::fs::create_dir_all(out)?;
    write_json(&out.join("summary.json"), &outcome)?;
    println!(
        "t2 {} min(v - w) {} mirrored {} region checks {} sub-solution violations {} (in core {})",
        outcome.t2,
        outcome.min_v_minus_w,
        outcome.mirrored.min_v_minus_w,
        outcome.region_checks_passed,
        outcome.subsolution.violations,
        outcome.subsolution.violations_in_core
    );
    Ok(if outcome.hard_ok(1e-6) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

/// Interface radius against the shrinking-sphere law.
pub fn mcf_experiment(cfg: &RunConfig) -> Result<(RadiusReport, Trajectory)> {
    let (schedule, _grid, initial) = prepare(cfg)?;
    let Profile::Interface(r0) = cfg.profile else {
        return Err(Error::Config("mcf-test needs an interface profile".into()));
    };
    let law = RadiusLaw::sphere(cfg.n.max(1), r0)?;
    let mut solver = cfg.solver_for(&schedule);
    if solver.t_end.is_none() {
        solver.t_end = Some(schedule.t_eps().min(0.9 * law.extinction()));
    }
    if solver.dump_every == 0 {
        solver.dump_every = 1;
    }
    let traj = run_mac(&solver, &initial, &schedule)?;
    let report = radius_error(&traj, &law, 10.0 * schedule.epsilon());
    Ok((report, traj))
}

pub fn cmd_mcf_test(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let report = match mcf_experiment(cfg) {
        Ok((r, _)) => r,
        Err(e @ Error::Config(_)) => return Err(e),
        Err(e) => {
            eprintln!("run failed: {e}");
            return Ok(run_exit_code(&e));
        }
    };
    std::fs::create_dir_all(out)?;
    let rows: Vec<Vec<String>> = report
        .samples
        .iter()
        .map(|s| {
            vec![
                num(s.t),
                num(s.r_extracted),
                num(s.r_exact),
                num(s.rel_error),
            ]
        })
        .collect();
    write_csv(
        &out.join("mcf.csv"),
        &["t", "r_extracted", "r_exact", "rel_error"],
        &rows,
    )?;
    write_json(&out.join("summary.json"), &report)?;
    println!(
        "max relative radius error {} (radius >= {}), largest re-expansion {}",
        report.max_rel_error, report.min_radius, report.max_reexpansion
    );
    let r0 = match cfg.profile {
        Profile::Interface(r0) => r0,
        Profile::Constant(_) => 1.0,
    };
    Ok(if report.max_reexpansion <= 1e-3 * r0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}
