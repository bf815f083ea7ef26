//! Single-step integrators and the Neumann heat propagator.

use crate::domain::{laplacian, Field, Grid, ImplicitDiffusion};
use crate::error::{Error, Result};
use crate::potential::{g_fn, gauss_legendre, phi, G_fn, PotentialContext};
use crate::schedule::Schedule;

fn check_finite(values: &[f64], t: f64) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(cell) => Err(Error::NonFiniteState { t, cell }),
        None => Ok(()),
    }
}

fn reaction_at(field: &Field, schedule: &Schedule, t_mid: f64) -> Result<Vec<f64>> {
    let ctx = PotentialContext::new(schedule, t_mid)?;
    Ok(field.values.iter().map(|&v| phi(v, &ctx)).collect())
}

/// One IMEX step with a prefactored diffusion matrix for `dt`.
pub(crate) fn imex_with(
    field: &Field,
    schedule: &Schedule,
    dt: f64,
    diffusion: &ImplicitDiffusion,
    reaction: bool,
) -> Result<Field> {
    let t_new = field.time + dt;
    let mut rhs = field.values.clone();
    if reaction {
        let r = reaction_at(field, schedule, field.time + 0.5 * dt)?;
        for (x, p) in rhs.iter_mut().zip(r) {
            *x -= dt * p;
        }
    }
    diffusion.solve_in_place(&mut rhs);
    check_finite(&rhs, t_new)?;
    Ok(Field {
        grid: field.grid.clone(),
        values: rhs,
        time: t_new,
    })
}

/// `(I - dt Lap) v_new = v_old - dt phi(v_old)`, coefficients at the step midpoint.
pub fn step_imex(field: &Field, schedule: &Schedule, dt: f64) -> Result<Field> {
    step_imex_with(field, schedule, dt, true)
}

/// [`step_imex`] with the reaction optionally switched off.
pub fn step_imex_with(
    field: &Field,
    schedule: &Schedule,
    dt: f64,
    reaction: bool,
) -> Result<Field> {
    check_dt(dt)?;
    let diffusion = ImplicitDiffusion::new(&field.grid, dt);
    imex_with(field, schedule, dt, &diffusion, reaction)
}

/// Forward Euler in both diffusion and reaction.
pub fn step_explicit(field: &Field, schedule: &Schedule, dt: f64) -> Result<Field> {
    step_explicit_with(field, schedule, dt, true)
}

pub fn step_explicit_with(
    field: &Field,
    schedule: &Schedule,
    dt: f64,
    reaction: bool,
) -> Result<Field> {
    check_dt(dt)?;
    let lap = laplacian(field);
    let mut values: Vec<f64> = field
        .values
        .iter()
        .zip(lap.values.iter())
        .map(|(v, l)| v + dt * l)
        .collect();
    if reaction {
        let r = reaction_at(field, schedule, field.time + 0.5 * dt)?;
        for (x, p) in values.iter_mut().zip(r) {
            *x -= dt * p;
        }
    }
    let t_new = field.time + dt;
    check_finite(&values, t_new)?;
    Ok(Field {
        grid: field.grid.clone(),
        values,
        time: t_new,
    })
}

/// Largest stable forward-Euler step `h^2 / (2 (N + 1))`.
pub fn explicit_dt_limit(grid: &Grid) -> f64 {
    grid.h() * grid.h() / (2.0 * (grid.ambient_dim_minus_one() as f64 + 1.0))
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )))
    }
}

/// Mean of `g` over the segment `[a, b]`.
fn g_mean(a: f64, b: f64) -> f64 {
    let d = b - a;
    if d.abs() > 1e-5 {
        (G_fn(b) - G_fn(a)) / d
    } else if d == 0.0 {
        g_fn(a)
    } else {
        gauss_legendre(g_fn, a, b, 1) / d
    }
}

fn g_slope(x: f64) -> f64 {
    let a = x.abs();
    let l = ((1.0 + a) / (1.0 - a)).abs().ln();
    let s = 2.0 * (a * l - 1.0);
    if s.is_finite() {
        s
    } else {
        0.0
    }
}

const NEWTON_MAX_ITER: usize = 40;
const NEWTON_TOL: f64 = 1e-14;

/// Average-vector-field step: `v_new - v_old = dt (Lap (v_old + v_new)/2 - phi_bar)`
/// with `phi_bar` the mean of `phi` over the segment `[v_old, v_new]`, taken at
/// the midpoint coefficients. With the coefficients frozen the step decreases
/// the discrete energy by exactly `dt e int ((v_new - v_old)/dt)^2`.
pub fn step_discrete_gradient(field: &Field, schedule: &Schedule, dt: f64) -> Result<Field> {
    step_discrete_gradient_with(field, schedule, dt, true)
}

pub fn step_discrete_gradient_with(
    field: &Field,
    schedule: &Schedule,
    dt: f64,
    reaction: bool,
) -> Result<Field> {
    check_dt(dt)?;
    let grid = &field.grid;
    let n = grid.n_cells();
    let t_mid = field.time + 0.5 * dt;
    let t_new = field.time + dt;
    let ctx = PotentialContext::new(schedule, t_mid)?;
    let (a_coef, b_coef) = if reaction {
        (ctx.two_over_eps_pow, ctx.kdot_over_k)
    } else {
        (0.0, 0.0)
    };
    let (cm, cp) = grid.lap_coefficients();
    let old = &field.values;
    let mut lap_old = vec![0.0; n];
    grid.laplacian_slice(old, &mut lap_old);

    // start from the IMEX predictor
    let mut v = imex_with(
        field,
        schedule,
        dt,
        &ImplicitDiffusion::new(grid, dt),
        reaction,
    )?
    .values;
    let mut lap_v = vec![0.0; n];
    let mut resid = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut last_update = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        grid.laplacian_slice(&v, &mut lap_v);
        for i in 0..n {
            let (a, b) = (old[i], v[i]);
            let phi_bar = 0.25 * a_coef * (a + b) * (a * a + b * b - 2.0) - b_coef * g_mean(a, b);
            resid[i] = b - a - dt * (0.5 * (lap_old[i] + lap_v[i]) - phi_bar);
            let dphi = 0.25 * a_coef * (a * a + 3.0 * b * b - 2.0 + 2.0 * a * b)
                - 0.5 * b_coef * g_slope(0.5 * (a + b));
            lower[i] = -0.5 * dt * cm[i];
            upper[i] = -0.5 * dt * cp[i];
            diag[i] = 1.0 + 0.5 * dt * (cm[i] + cp[i]) + dt * dphi;
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut resid);
        let mut update = 0.0f64;
        for (x, d) in v.iter_mut().zip(resid.iter()) {
            *x -= d;
            update = update.max(d.abs());
        }
        check_finite(&v, t_new)?;
        last_update = update;
        if update <= NEWTON_TOL {
            return Ok(Field {
                grid: grid.clone(),
                values: v,
                time: t_new,
            });
        }
    }
    Err(Error::NonConvergence {
        t: t_new,
        update: last_update,
    })
}

/// Thomas algorithm; `rhs` is overwritten with the solution.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut prev_c = 0.0;
    for i in 0..n {
        let l = if i > 0 { lower[i] } else { 0.0 };
        let piv = diag[i] - l * prev_c;
        c[i] = upper[i] / piv;
        rhs[i] = (rhs[i] - if i > 0 { l * rhs[i - 1] } else { 0.0 }) / piv;
        prev_c = c[i];
    }
    for i in (0..n.saturating_sub(1)).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Neumann heat propagator for a fixed time span, applied by implicit Euler
/// sub-steps no longer than `min(h, h^2)`.
#[derive(Debug, Clone)]
pub struct HeatPropagator {
    substeps: usize,
    diffusion: Option<ImplicitDiffusion>,
    span: f64,
}

impl HeatPropagator {
    pub fn new(grid: &Grid, span: f64) -> Self {
        let k_max = grid.h().min(grid.h() * grid.h());
        if span <= 0.0 {
            return Self {
                substeps: 0,
                diffusion: None,
                span: 0.0,
            };
        }
        let substeps = (span / k_max).ceil().max(1.0) as usize;
        let k = span / substeps as f64;
        Self {
            substeps,
            diffusion: Some(ImplicitDiffusion::new(grid, k)),
            span,
        }
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn apply_in_place(&self, values: &mut [f64]) {
        if let Some(d) = &self.diffusion {
            for _ in 0..self.substeps {
                d.solve_in_place(values);
            }
        }
    }
}

/// Solution of the Neumann heat equation after time `t`.
pub fn solve_heat(initial: &Field, t: f64) -> Result<Field> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime {
            t,
            range: "[0, inf)".into(),
        });
    }
    let mut values = initial.values.clone();
    HeatPropagator::new(&initial.grid, t).apply_in_place(&mut values);
    Ok(Field {
        grid: initial.grid.clone(),
        values,
        time: initial.time + t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::integrate;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sched() -> Schedule {
        Schedule::new(0.1).unwrap()
    }

    #[test]
    fn heat_only_imex_is_implicit_heat_step() {
        let g = Grid::radial(1, 3.0, 128).unwrap();
        let c = Field::constant(&g, 0.0, 0.37);
        let next = step_imex_with(&c, &sched(), 0.01, false).unwrap();
        assert!(next.sup_distance(&c) < 1e-14);
        let v = Field::from_fn(&g, 0.0, |r| (-r * r).exp());
        let a = step_imex_with(&v, &sched(), 0.01, false).unwrap();
        // (I - dt Lap) a = v
        let back = a.zip_map(&laplacian(&a), |x, l| x - 0.01 * l);
        assert!(back.sup_distance(&v) < 1e-14);
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let g = Grid::radial(1, 3.0, 128).unwrap();
        let s = sched();
        for c in [0.0, 1.0, -1.0] {
            let v = Field::constant(&g, 0.2, c);
            for step in [step_imex, step_explicit, step_discrete_gradient] {
                let next = step(&v, &s, 1e-4).unwrap();
                assert!(next.sup_distance(&v) <= 1e-12, "c = {c}");
            }
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let g = Grid::radial(1, 3.0, 128).unwrap();
        let v = Field::from_fn(&g, 0.0, |r| ((1.0 - r) / 0.1).tanh());
        let mut cur = v;
        let mut failed = false;
        for _ in 0..200 {
            match step_explicit(&cur, &sched(), 1.0) {
                Ok(next) => cur = next,
                Err(Error::NonFiniteState { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failed);
    }

    #[test]
    fn heat_preserves_constants_and_mass() {
        let g = Grid::radial(2, 2.0, 64).unwrap();
        let c = Field::constant(&g, 0.0, 2.5);
        assert!(solve_heat(&c, 0.7).unwrap().sup_distance(&c) < 1e-13);
        let v = Field::from_fn(&g, 0.0, |r| (-4.0 * r * r).exp());
        let m0 = integrate(&v);
        let m1 = integrate(&solve_heat(&v, 0.3).unwrap());
        assert_relative_eq!(m0, m1, max_relative = 1e-10);
    }

    #[test]
    fn heat_cosine_mode_decays_at_eigenvalue() {
        let l = 1.0;
        let g = Grid::line(l, 512).unwrap();
        let k = PI / l;
        let v = Field::from_fn(&g, 0.0, |r| (k * r).cos());
        let t = 0.1;
        let u = solve_heat(&v, t).unwrap();
        let decay = (-k * k * t).exp();
        let err = g
            .centers()
            .iter()
            .zip(u.values.iter())
            .map(|(&r, &x)| (x - decay * (k * r).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err / decay < 1e-4, "relative error {}", err / decay);
    }

    #[test]
    fn discrete_gradient_dissipates_frozen_energy() {
        // with kappa frozen the energy is a Lyapunov function of the step
        let s = Schedule::frozen(0.1).unwrap();
        let g = Grid::radial(1, 3.0, 256).unwrap();
        let mut v = Field::from_fn(&g, 0.0, |r| ((1.0 - r) / 0.1).tanh());
        let energy = |f: &Field| crate::domain::integrate(&crate::measures::mu_density(f, &s));
        let mut e_prev = energy(&v);
        for _ in 0..20 {
            let next = step_discrete_gradient(&v, &s, 2.5e-3).unwrap();
            let e_next = energy(&next);
            let dissip = 2.5e-3
                * s.width(0.0)
                * integrate(&v.zip_map(&next, |a, b| ((b - a) / 2.5e-3).powi(2)));
            assert!((e_prev - e_next - dissip).abs() <= 1e-10 * e_prev.abs().max(1.0));
            e_prev = e_next;
            v = next;
        }
    }

    #[test]
    fn tridiagonal_against_dense() {
        let lower = [0.0, -1.0, 0.5, 2.0];
        let diag = [4.0, 5.0, 6.0, 7.0];
        let upper = [1.0, 1.5, -1.0, 0.0];
        let x = [1.0, -2.0, 3.0, 0.5];
        let mut rhs = [0.0; 4];
        for i in 0..4 {
            rhs[i] = diag[i] * x[i];
            if i > 0 {
                rhs[i] += lower[i] * x[i - 1];
            }
            if i < 3 {
                rhs[i] += upper[i] * x[i + 1];
            }
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for i in 0..4 {
            assert_relative_eq!(rhs[i], x[i], epsilon = 1e-14);
        }
    }
}
