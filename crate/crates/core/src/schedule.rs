//! Time and interface-width bookkeeping.
//!
//! The interface width is `e(t) = eps^(1 - kappa(t))` with
//! `kappa(t) = arctan(t) / pi` and `K(eps) = 2 / |ln eps|`. All logarithms are
//! natural. The run ends at `t_eps = |ln eps| / pi`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Which exponent law drives the schedule.
///
/// `Frozen` pins `kappa = 0` for all time, which turns the flow back into the
/// classical Allen-Cahn equation. It exists for tests only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum KappaLaw {
    ArcTan,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    epsilon: f64,
    log_eps_abs: f64,
    t_eps: f64,
    law: KappaLaw,
}

pub fn kappa(t: f64) -> f64 {
    t.atan() / PI
}

pub fn kappa_dot(t: f64) -> f64 {
    1.0 / (PI * (1.0 + t * t))
}

pub fn kappa_ddot(t: f64) -> f64 {
    let s = 1.0 + t * t;
    -2.0 * t / (PI * s * s)
}

#[allow(non_snake_case)]
pub fn K_of_eps(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(2.0 / eps.ln().abs())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

impl Schedule {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        let log_eps_abs = epsilon.ln().abs();
        Ok(Self {
            epsilon,
            log_eps_abs,
            t_eps: log_eps_abs / PI,
            law: KappaLaw::ArcTan,
        })
    }

    /// Schedule with `kappa` pinned to zero (classical Allen-Cahn). Test hook.
    #[doc(hidden)]
    pub fn frozen(epsilon: f64) -> Result<Self> {
        let mut s = Self::new(epsilon)?;
        s.law = KappaLaw::Frozen;
        Ok(s)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn log_eps_abs(&self) -> f64 {
        self.log_eps_abs
    }

    pub fn t_eps(&self) -> f64 {
        self.t_eps
    }

    pub fn is_frozen(&self) -> bool {
        self.law == KappaLaw::Frozen
    }

    #[allow(non_snake_case)]
    pub fn K(&self) -> f64 {
        2.0 / self.log_eps_abs
    }

    pub fn kappa(&self, t: f64) -> f64 {
        match self.law {
            KappaLaw::ArcTan => kappa(t),
            KappaLaw::Frozen => 0.0,
        }
    }

    pub fn kappa_dot(&self, t: f64) -> f64 {
        match self.law {
            KappaLaw::ArcTan => kappa_dot(t),
            KappaLaw::Frozen => 0.0,
        }
    }

    pub fn kappa_ddot(&self, t: f64) -> f64 {
        match self.law {
            KappaLaw::ArcTan => kappa_ddot(t),
            KappaLaw::Frozen => 0.0,
        }
    }

    /// Interface width `eps^(1 - kappa(t))`.
    pub fn width(&self, t: f64) -> f64 {
        self.epsilon.powf(1.0 - self.kappa(t))
    }

    /// `2 / eps^(2(1 - kappa))`, the coefficient of the cubic term.
    pub fn cubic_coefficient(&self, t: f64) -> f64 {
        let w = self.width(t);
        2.0 / (w * w)
    }

    /// `kappa_dot / K`, the coefficient of the logarithmic term.
    pub fn log_coefficient(&self, t: f64) -> f64 {
        self.kappa_dot(t) / self.K()
    }

    /// Weight multiplying `int G(v) dx` in the energy equality, as printed:
    /// `(kappa_ddot + kappa_dot^2 |ln eps|) / (K kappa_dot) * eps^(1 - kappa)`.
    ///
    /// Negative for `t > |ln eps| / (2 pi)`; see [`Schedule::energy_weight_sign_change`].
    pub fn energy_weight(&self, t: f64) -> f64 {
        let kd = self.kappa_dot(t);
        if kd == 0.0 {
            return 0.0;
        }
        let num = self.kappa_ddot(t) + kd * kd * self.log_eps_abs;
        num / (self.K() * kd) * self.width(t)
    }

    /// Time after which `kappa_ddot + kappa_dot^2 |ln eps|` turns negative.
    pub fn energy_weight_sign_change(&self) -> f64 {
        self.log_eps_abs / (2.0 * PI)
    }

    /// Rate `d/dt ln e(t) = kappa_dot |ln eps|` multiplying `int dxi` in the
    /// energy balance obtained by testing the equation with `e(t) dv/dt`.
    pub fn xi_balance_weight(&self, t: f64) -> f64 {
        self.kappa_dot(t) * self.log_eps_abs
    }

    /// Rate `d/dt (e(t) kappa_dot / K)` multiplying `int G(v) dx` in the same
    /// balance: `e (kappa_ddot + kappa_dot^2 |ln eps|) / K`.
    pub fn g_balance_weight(&self, t: f64) -> f64 {
        let kd = self.kappa_dot(t);
        (self.kappa_ddot(t) + kd * kd * self.log_eps_abs) / self.K() * self.width(t)
    }
}
