//! Comparison with the shrinking-ball barrier `w = tanh(d / e)`,
//! `d(x, t) = 2 sqrt(T - t) - |x|`.

use serde::Serialize;

use crate::domain::Field;
use crate::error::{Error, Result};
use crate::potential::{phi, PotentialContext};
use crate::schedule::Schedule;
use crate::solver::Trajectory;

/// Tolerance on the initial domination `v0 >= w0`, absorbing the clamp of the
/// initial data strictly inside the wells.
pub const DOMINATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierSpec {
    #[serde(rename = "T")]
    pub extinction: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub t2: f64,
}

impl BarrierSpec {
    pub fn new(extinction: f64, m: f64, schedule: &Schedule) -> Result<Self> {
        let t2 = solve_t2(extinction, m, schedule)?;
        Ok(Self { extinction, m, t2 })
    }

    /// Barrier distance `2 sqrt(T - t) - r`.
    pub fn distance(&self, r: f64, t: f64) -> f64 {
        2.0 * (self.extinction - t).sqrt() - r
    }
}

pub fn barrier_w(r: f64, t: f64, extinction: f64, schedule: &Schedule) -> Result<f64> {
    if !(t >= 0.0 && t < extinction) {
        return Err(Error::InvalidTime {
            t,
            range: format!("[0, {extinction})"),
        });
    }
    Ok(((2.0 * (extinction - t).sqrt() - r) / schedule.width(t)).tanh())
}

/// `psi(t) = t + M^2 e(t)^2 |ln eps|^2 / 4 - T`, strictly increasing.
pub fn t2_residual(t: f64, extinction: f64, m: f64, schedule: &Schedule) -> f64 {
    let e = schedule.width(t);
    let l = schedule.log_eps_abs();
    t + m * m * e * e * l * l / 4.0 - extinction
}

/// Root of [`t2_residual`] on `[0, T]` by bisection.
pub fn solve_t2(extinction: f64, m: f64, schedule: &Schedule) -> Result<f64> {
    if !(extinction > 0.0 && extinction.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "T must be positive, got {extinction}"
        )));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "M must be non-negative, got {m}"
        )));
    }
    let psi0 = t2_residual(0.0, extinction, m, schedule);
    if psi0 > 0.0 {
        return Err(Error::NoSolution { psi0 });
    }
    let (mut lo, mut hi) = (0.0, extinction);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t2_residual(mid, extinction, m, schedule) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // pick the endpoint with the smaller residual
    let (rl, rh) = (
        t2_residual(lo, extinction, m, schedule).abs(),
        t2_residual(hi, extinction, m, schedule).abs(),
    );
    Ok(if rl <= rh { lo } else { hi })
}

/// `tanh(M |ln eps|) = (1 - eps^{2M}) / (1 + eps^{2M})`.
pub fn threshold(m: f64, eps: f64) -> f64 {
    (m * eps.ln().abs()).tanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCheck {
    pub t: f64,
    /// Fields are compared on `|x| < 2 sqrt(T - t) - M e |ln eps|`.
    pub region_radius: f64,
    /// `NaN` when the region contains no cell centre.
    pub min_v: f64,
    pub threshold: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub t2: f64,
    /// `min (v - w)` over snapshots with `t <= t2`.
    pub min_v_minus_w: f64,
    /// The same minimum over all snapshots before `T`.
    pub min_v_minus_w_all: f64,
    pub region_checks: Vec<RegionCheck>,
    pub sign: f64,
}

fn min_gap(field: &Field, spec: &BarrierSpec, schedule: &Schedule, sign: f64) -> Result<f64> {
    let mut m = f64::INFINITY;
    for (&r, &v) in field.grid.centers().iter().zip(field.values.iter()) {
        let w = barrier_w(r, field.time, spec.extinction, schedule)?;
        m = m.min(sign * v - w);
    }
    Ok(m)
}

/// Checks `v >= w` along the snapshots. With `sign = -1` the mirrored
/// statement `v <= -w` for data below `-w` is checked instead.
pub fn check_comparison_signed(
    trajectory: &Trajectory,
    spec: &BarrierSpec,
    schedule: &Schedule,
    slack: f64,
    sign: f64,
) -> Result<ComparisonReport> {
    let first = trajectory
        .snapshots
        .first()
        .ok_or_else(|| Error::InvalidArgument("trajectory has no snapshots".into()))?;
    let g0 = min_gap(first, spec, schedule, sign)?;
    if g0 < -DOMINATION_TOL {
        return Err(Error::PreconditionUnmet { min_gap: g0 });
    }
    let thr = threshold(spec.m, schedule.epsilon());
    let mut min_in = f64::INFINITY;
    let mut min_all = f64::INFINITY;
    let mut region_checks = Vec::new();
    for f in &trajectory.snapshots {
        if f.time >= spec.extinction {
            break;
        }
        let gap = min_gap(f, spec, schedule, sign)?;
        min_all = min_all.min(gap);
        if f.time <= spec.t2 {
            min_in = min_in.min(gap);
        }
        if f.time > 0.0 && f.time < spec.t2 {
            let offset = spec.m * schedule.width(f.time) * schedule.log_eps_abs();
            let region_radius = 2.0 * (spec.extinction - f.time).sqrt() - offset;
            let min_v = f
                .grid
                .centers()
                .iter()
                .zip(f.values.iter())
                .filter(|(&r, _)| r < region_radius)
                .map(|(_, &v)| sign * v)
                .fold(f64::NAN, f64::min);
            region_checks.push(RegionCheck {
                t: f.time,
                region_radius,
                min_v,
                threshold: thr,
                ok: min_v.is_nan() || min_v >= thr - slack,
            });
        }
    }
    Ok(ComparisonReport {
        t2: spec.t2,
        min_v_minus_w: min_in,
        min_v_minus_w_all: min_all,
        region_checks,
        sign,
    })
}

pub fn check_comparison(
    trajectory: &Trajectory,
    spec: &BarrierSpec,
    schedule: &Schedule,
    slack: f64,
) -> Result<ComparisonReport> {
    check_comparison_signed(trajectory, spec, schedule, slack, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsolutionSample {
    pub r: f64,
    pub t: f64,
    /// `w_t - Lap w + phi(w)` by central differences.
    pub operator: f64,
    /// `(q'/e) (d_t - Lap d + (2q/e)(|Dd|^2 - 1))` with `|Dd| = 1`.
    pub analytic: f64,
    /// `d_t - Lap d = -1/sqrt(T - t) + N / r`.
    pub bracket: f64,
    pub scale: f64,
    /// Rounding floor of the second differences.
    pub noise: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsolutionReport {
    pub samples: Vec<SubsolutionSample>,
    pub max_operator: f64,
    /// Largest `|operator - analytic| / max(scale, noise)`.
    pub max_identity_defect: f64,
    pub violations: usize,
    /// Samples where the exact operator exceeds the tolerance.
    pub analytic_violations: usize,
    /// Violations located where the bracket is positive, i.e. `r < N sqrt(T - t)`.
    pub violations_in_core: usize,
}

/// Evaluates the flow operator on the barrier at `(r, t)` samples in ambient
/// dimension `N + 1`.
pub fn verify_subsolution(
    spec: &BarrierSpec,
    schedule: &Schedule,
    ambient_dim_minus_one: usize,
    samples: &[(f64, f64)],
    rel_tol: f64,
) -> Result<SubsolutionReport> {
    let n = ambient_dim_minus_one as f64;
    let w = |r: f64, t: f64| barrier_w(r, t, spec.extinction, schedule);
    let mut out = Vec::with_capacity(samples.len());
    for &(r, t) in samples {
        if r <= 0.0 {
            return Err(Error::InvalidArgument("samples must avoid r = 0".into()));
        }
        let e = schedule.width(t);
        let hr = 1e-3 * e;
        let ht = 1e-3 * e * e;
        let w0 = w(r, t)?;
        let wt = (w(r, t + ht)? - w(r, (t - ht).max(0.0))?) / (t + ht - (t - ht).max(0.0));
        let (wp, wm) = (w(r + hr, t)?, w((r - hr).max(0.0), t)?);
        let wrr = (wp - 2.0 * w0 + wm) / (hr * hr);
        let wr = (wp - wm) / (2.0 * hr);
        let lap = wrr + n / r * wr;
        let ctx = PotentialContext::new(schedule, t)?;
        let operator = wt - lap + phi(w0, &ctx);
        let d = spec.distance(r, t);
        let sech2 = 1.0 / (d / e).cosh().powi(2);
        let sqrt_rem = (spec.extinction - t).sqrt();
        let bracket = -1.0 / sqrt_rem + n / r;
        let analytic = sech2 / e * bracket;
        let scale = sech2 / e * (1.0 / sqrt_rem + n / r);
        let noise = 4.0 * f64::EPSILON / (hr * hr);
        out.push(SubsolutionSample {
            r,
            t,
            operator,
            analytic,
            bracket,
            scale,
            noise,
            ok: operator <= rel_tol * scale + noise,
        });
    }
    let max_operator = out
        .iter()
        .map(|s| s.operator)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_identity_defect = out
        .iter()
        .map(|s| (s.operator - s.analytic).abs() / s.scale.max(s.noise))
        .fold(0.0, f64::max);
    let violations = out.iter().filter(|s| !s.ok).count();
    let analytic_violations = out
        .iter()
        .filter(|s| s.analytic > rel_tol * s.scale)
        .count();
    let violations_in_core = out.iter().filter(|s| !s.ok && s.bracket > 0.0).count();
    Ok(SubsolutionReport {
        samples: out,
        max_operator,
        max_identity_defect,
        violations,
        analytic_violations,
        violations_in_core,
    })
}
