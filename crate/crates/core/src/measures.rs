//! Energy and discrepancy densities, the time-integrated energy balance and
//! the discrepancy total.
//!
//! With `e = eps^(1 - kappa)` and `B = kappa_dot / K` the flow is the
//! `L^2`-gradient flow, scaled by `1/e`, of
//!
//! ```text
//! mu = int e/2 |Dv|^2 + (v^2 - 1)^2 / (2e) - e B G(v) dx,
//! ```
//!
//! and the discrepancy density is `xi = (v^2 - 1)^2 / (2e) - e/2 |Dv|^2`, which
//! vanishes on the profile `tanh(r / e)`. Differentiating `mu` along the flow
//! gives the balance
//!
//! ```text
//! mu_t + int_0^t e int v_t^2 + int_0^t kappa_dot |ln eps| int xi
//!      + int_0^t e (kappa_ddot + kappa_dot^2 |ln eps|) / K int G = mu_0.
//! ```
//!
//! The ledger accumulates these terms. It also carries the variant weights
//! `kappa_dot / K` on `xi` and [`Schedule::energy_weight`] on `G`, and reports
//! the balance residual under both.

use serde::Serialize;

use crate::domain::{grad_sq, integrate, Field};
use crate::error::{Error, Result};
use crate::potential::G_fn;
use crate::schedule::Schedule;

/// `(v^2 - 1)^2 / (2e)`, the potential part shared by `mu` and `xi`.
pub fn potential_density(v: f64, width: f64) -> f64 {
    let s = v * v - 1.0;
    s * s / (2.0 * width)
}

pub fn mu_density(field: &Field, schedule: &Schedule) -> Field {
    let t = field.time;
    let e = schedule.width(t);
    let b = schedule.log_coefficient(t);
    let gs = grad_sq(field);
    field.zip_map(&gs, |v, g2| {
        0.5 * e * g2 + potential_density(v, e) - e * b * G_fn(v)
    })
}

pub fn xi_density(field: &Field, schedule: &Schedule) -> Field {
    let e = schedule.width(field.time);
    let gs = grad_sq(field);
    field.zip_map(&gs, |v, g2| potential_density(v, e) - 0.5 * e * g2)
}

/// Discrepancy density in distance form: writing `v = tanh(d / e)`, it equals
/// `(v^2 - 1)^2 / (2e) * (1 - |Dd|^2)`.
#[derive(Debug, Clone)]
pub struct XiForms {
    pub direct: Field,
    pub distance_form: Field,
    /// `direct / distance_form` per cell, `NaN` where the latter vanishes.
    pub ratio: Vec<f64>,
}

pub const ATANH_LIMIT: f64 = 1.0 - 1e-14;

pub fn xi_r_form(field: &Field, schedule: &Schedule) -> Result<XiForms> {
    if let Some((cell, v)) = field
        .values
        .iter()
        .enumerate()
        .find(|(_, v)| v.abs() >= ATANH_LIMIT)
    {
        return Err(Error::ATanhDomain {
            cell,
            abs_v: v.abs(),
        });
    }
    let e = schedule.width(field.time);
    let dist = field.map(|v| e * v.atanh());
    let dd = grad_sq(&dist);
    let distance_form = field.zip_map(&dd, |v, d2| potential_density(v, e) * (1.0 - d2));
    let direct = xi_density(field, schedule);
    let ratio = direct
        .values
        .iter()
        .zip(distance_form.values.iter())
        .map(|(a, b)| if *b == 0.0 { f64::NAN } else { a / b })
        .collect();
    Ok(XiForms {
        direct,
        distance_form,
        ratio,
    })
}

/// Running terms of the energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub t: f64,
    pub term_time_deriv: f64,
    pub term_mu_t: f64,
    pub term_xi: f64,
    #[serde(rename = "term_G")]
    pub term_g: f64,
    pub mu_0: f64,
    /// `xi` accumulated with weight `kappa_dot / K`.
    pub alt_term_xi: f64,
    /// `G` accumulated with [`Schedule::energy_weight`].
    #[serde(rename = "alt_term_G")]
    pub alt_term_g: f64,
}

impl EnergyLedger {
    pub fn start(initial: &Field, schedule: &Schedule) -> Self {
        let mu_0 = integrate(&mu_density(initial, schedule));
        Self {
            t: initial.time,
            term_time_deriv: 0.0,
            term_mu_t: mu_0,
            term_xi: 0.0,
            term_g: 0.0,
            mu_0,
            alt_term_xi: 0.0,
            alt_term_g: 0.0,
        }
    }
}

/// Midpoint increments for one step from `v_old` to `v_new`.
pub fn ledger_step(
    ledger: &EnergyLedger,
    v_old: &Field,
    v_new: &Field,
    schedule: &Schedule,
) -> EnergyLedger {
    let dt = v_new.time - v_old.time;
    let t_mid = v_old.time + 0.5 * dt;
    let mid = Field {
        grid: v_old.grid.clone(),
        values: v_old
            .values
            .iter()
            .zip(v_new.values.iter())
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
        time: t_mid,
    };
    let rate_sq = v_old.zip_map(v_new, |a, b| {
        let r = (b - a) / dt;
        r * r
    });
    let xi_int = integrate(&xi_density(&mid, schedule));
    let g_int = integrate(&mid.map(G_fn));
    EnergyLedger {
        t: v_new.time,
        term_time_deriv: ledger.term_time_deriv + dt * schedule.width(t_mid) * integrate(&rate_sq),
        term_mu_t: integrate(&mu_density(v_new, schedule)),
        term_xi: ledger.term_xi + dt * schedule.xi_balance_weight(t_mid) * xi_int,
        term_g: ledger.term_g + dt * schedule.g_balance_weight(t_mid) * g_int,
        mu_0: ledger.mu_0,
        alt_term_xi: ledger.alt_term_xi + dt * schedule.log_coefficient(t_mid) * xi_int,
        alt_term_g: ledger.alt_term_g + dt * schedule.energy_weight(t_mid) * g_int,
    }
}

fn relative_defect(sum: f64, mu_0: f64) -> f64 {
    (sum - mu_0).abs() / mu_0.abs().max(1e-30)
}

/// Relative defect of the energy balance.
pub fn energy_residual(ledger: &EnergyLedger) -> f64 {
    relative_defect(
        ledger.term_time_deriv + ledger.term_mu_t + ledger.term_xi + ledger.term_g,
        ledger.mu_0,
    )
}

/// The same defect with the alternative `xi` and `G` weights.
pub fn alt_energy_residual(ledger: &EnergyLedger) -> f64 {
    relative_defect(
        ledger.term_time_deriv + ledger.term_mu_t + ledger.alt_term_xi + ledger.alt_term_g,
        ledger.mu_0,
    )
}

/// Running time-integrated discrepancy `int kappa_dot int xi dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyAccumulator {
    pub total: f64,
    pub min_xi_density: f64,
    /// Largest potential density seen, the natural scale for `min_xi_density`.
    pub max_potential_density: f64,
}

impl DiscrepancyAccumulator {
    pub fn start(initial: &Field, schedule: &Schedule) -> Self {
        let e = schedule.width(initial.time);
        let xi = xi_density(initial, schedule);
        Self {
            total: 0.0,
            min_xi_density: xi.values.iter().copied().fold(f64::INFINITY, f64::min),
            max_potential_density: initial
                .values
                .iter()
                .map(|&v| potential_density(v, e))
                .fold(0.0, f64::max),
        }
    }

    /// Adds the midpoint contribution of one step and folds the new field's
    /// pointwise minimum into `min_xi_density`.
    pub fn step(&mut self, v_old: &Field, v_new: &Field, schedule: &Schedule) {
        let dt = v_new.time - v_old.time;
        let t_mid = v_old.time + 0.5 * dt;
        let mid = Field {
            grid: v_old.grid.clone(),
            values: v_old
                .values
                .iter()
                .zip(v_new.values.iter())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
            time: t_mid,
        };
        self.total += dt * schedule.kappa_dot(t_mid) * integrate(&xi_density(&mid, schedule));
        let e = schedule.width(v_new.time);
        let xi = xi_density(v_new, schedule);
        for (&x, &v) in xi.values.iter().zip(v_new.values.iter()) {
            self.min_xi_density = self.min_xi_density.min(x);
            self.max_potential_density = self.max_potential_density.max(potential_density(v, e));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub eps: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "D_times_logeps")]
    pub d_times_logeps: f64,
    pub min_xi_density: f64,
}

impl DiscrepancyResult {
    pub fn from_accumulator(acc: &DiscrepancyAccumulator, schedule: &Schedule) -> Self {
        Self {
            eps: schedule.epsilon(),
            d: acc.total,
            d_times_logeps: acc.total * schedule.log_eps_abs(),
            min_xi_density: acc.min_xi_density,
        }
    }
}
