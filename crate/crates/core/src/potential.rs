//! The nonlinearity family of the modified Allen-Cahn flow.
//!
//! `phi(x) = A f(x) - B g(x)` with `A = 2 / e^2`, `B = kappa_dot / K` and
//! `e = eps^(1 - kappa)`. Factoring gives `phi(x) = (x^2 - 1)(A x - B L(x))`
//! where `L(x) = ln|(1 + x)/(1 - x)|`, so besides `0` and `+-1` the zeros are
//! the two positive solutions `alpha < 1 < beta` of `A x = B L(x)`.
//!
//! For every practical `eps` the gaps `1 - alpha` and `beta - 1` are far below
//! machine epsilon (often below the smallest normal double), so the wells are
//! located and stored through the logarithm of the gap.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::Schedule;

/// Distance to `+-1` below which the logarithmic factor is replaced by its limit.
const SINGULAR_GAP: f64 = 1e-12;

pub fn f(x: f64) -> f64 {
    (x * x - 1.0) * x
}

/// `(x^2 - 1) ln|(1 + x)/(1 - x)|`, continuously extended by `0` at `x = +-1`.
pub fn g_fn(x: f64) -> f64 {
    let a = x.abs();
    let gap = 1.0 - a;
    if gap.abs() < SINGULAR_GAP {
        return 0.0;
    }
    let log_ratio = (1.0 + a).ln() - gap.abs().ln();
    let v = -gap * (1.0 + a) * log_ratio;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

#[allow(non_snake_case)]
pub fn F_fn(u: f64) -> f64 {
    let s = u * u - 1.0;
    0.5 * s * s
}

/// Antiderivative of [`g_fn`] normalised so that `G(+-1) = 0`.
#[allow(non_snake_case)]
pub fn G_fn(u: f64) -> f64 {
    let a = u.abs();
    let gap = 1.0 - a;
    if gap == 0.0 {
        return 0.0;
    }
    let t1 = (a - 2.0) * (a + 1.0) * (a + 1.0) * (1.0 + a).ln() / 3.0;
    // vanishing quadratic factor first, then the log
    let t2 = if gap.abs() < SINGULAR_GAP {
        0.0
    } else {
        (a + 2.0) * (gap * gap) * gap.abs().ln() / 3.0
    };
    t1 - t2 + a * a / 3.0 + 4.0 / 3.0 * LN_2 - 1.0 / 3.0
}

/// Derivative of the cutoff used in the Duhamel construction: `1` on
/// `[-1, 1]`, `0` outside `(-2, 2)`, quintic smoothstep in between (C^2).
pub fn chi_dot(tau: f64) -> f64 {
    let a = tau.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        1.0 - s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }
}

/// Coefficients of the nonlinearity frozen at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialContext {
    pub eps: f64,
    pub t: f64,
    /// `(|ln eps| / 2) kappa_dot eps^(2(1 - kappa))`.
    pub g_scale: f64,
    /// `2 / eps^(2(1 - kappa))`.
    pub two_over_eps_pow: f64,
    /// `kappa_dot / K(eps)`.
    pub kdot_over_k: f64,
    /// `eps^(1 - kappa)`.
    pub width: f64,
}

impl PotentialContext {
    pub fn new(schedule: &Schedule, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime {
                t,
                range: "[0, inf)".into(),
            });
        }
        let width = schedule.width(t);
        Ok(Self {
            eps: schedule.epsilon(),
            t,
            g_scale: 0.5 * schedule.log_eps_abs() * schedule.kappa_dot(t) * width * width,
            two_over_eps_pow: schedule.cubic_coefficient(t),
            kdot_over_k: schedule.log_coefficient(t),
            width,
        })
    }

    /// Context with arbitrary coefficients, for exercising degenerate regimes.
    #[doc(hidden)]
    pub fn from_coefficients(two_over_eps_pow: f64, kdot_over_k: f64) -> Self {
        let width = (2.0 / two_over_eps_pow).sqrt();
        Self {
            eps: f64::NAN,
            t: 0.0,
            g_scale: f64::NAN,
            two_over_eps_pow,
            kdot_over_k,
            width,
        }
    }

    /// `B / A`: the coefficient `c` in the well equation `x = c L(x)`.
    pub fn well_coefficient(&self) -> f64 {
        self.kdot_over_k / self.two_over_eps_pow
    }

    /// `phi` at `x = 1 + side * exp(log_gap)`, returned as the pair
    /// `(x^2 - 1, A x - B L(x))`. The product is `phi(x)`; the pair keeps the
    /// sign recoverable when the product underflows.
    pub fn phi_factors_near_one(&self, log_gap: f64, side: Side) -> (f64, f64) {
        let u = log_gap.exp();
        let s = side.sign();
        let x = 1.0 + s * u;
        let poly = s * u * (2.0 + s * u);
        let l = (2.0 + s * u).ln() - log_gap;
        (poly, self.two_over_eps_pow * x - self.kdot_over_k * l)
    }

    /// `phi'(x) = A (3x^2 - 1) - 2B (x L(x) - 1)` at `x = 1 + side * exp(log_gap)`.
    pub fn phi_prime_near_one(&self, log_gap: f64, side: Side) -> f64 {
        let u = log_gap.exp();
        let s = side.sign();
        let x = 1.0 + s * u;
        let l = (2.0 + s * u).ln() - log_gap;
        let three_x2_m1 = 2.0 + s * u * (6.0 + 3.0 * s * u);
        self.two_over_eps_pow * three_x2_m1 - 2.0 * self.kdot_over_k * (x * l - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Below,
    Above,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Below => -1.0,
            Side::Above => 1.0,
        }
    }
}

/// `phi_eps(x)`; exactly odd in `x`.
pub fn phi(x: f64, ctx: &PotentialContext) -> f64 {
    let a = x.abs();
    let v = ctx.two_over_eps_pow * f(a) - ctx.kdot_over_k * g_fn(a);
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Closed-form derivative of `phi`; `-inf` at `x = +-1`.
pub fn phi_prime(x: f64, ctx: &PotentialContext) -> f64 {
    let a = x.abs();
    let gap = 1.0 - a;
    let l = if gap == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + a).ln() - gap.abs().ln()
    };
    ctx.two_over_eps_pow * (3.0 * a * a - 1.0) - 2.0 * ctx.kdot_over_k * (a * l - 1.0)
}

/// `W_eps(u) = F(u) / (2 e) - (kappa_dot / K) G(u)`.
#[allow(non_snake_case)]
pub fn W_fn(u: f64, ctx: &PotentialContext) -> f64 {
    F_fn(u) / (2.0 * ctx.width) - ctx.kdot_over_k * G_fn(u)
}

/// The wells of `phi` at one time, stored through the logarithms of the gaps
/// `delta = 1 - alpha` and `eta = beta - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootPair {
    pub log_delta: f64,
    pub log_eta: f64,
    pub t: f64,
    pub eps: f64,
}

impl RootPair {
    pub fn delta(&self) -> f64 {
        self.log_delta.exp()
    }

    pub fn eta(&self) -> f64 {
        self.log_eta.exp()
    }

    /// Rounded to the nearest double, which is `1.0` once `delta < 1.1e-16`.
    pub fn alpha(&self) -> f64 {
        1.0 - self.delta()
    }

    pub fn beta(&self) -> f64 {
        1.0 + self.eta()
    }

    /// `0 < alpha < 1 < beta`, decided on the gaps.
    pub fn is_ordered(&self) -> bool {
        self.log_delta.is_finite() && self.log_delta < 0.0 && self.log_eta.is_finite()
    }
}

fn bisect_log_gap(ctx: &PotentialContext, side: Side, mut lo: f64, mut hi: f64) -> Result<f64> {
    let bracket = |l: f64| ctx.phi_factors_near_one(l, side).1;
    let (mut f_lo, f_hi) = (bracket(lo), bracket(hi));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        let x = |l: f64| 1.0 + side.sign() * l.exp();
        return Err(Error::NoRootInBracket {
            lo: x(lo),
            hi: x(hi),
            sign_lo: f_lo.signum(),
            sign_hi: f_hi.signum(),
        });
    }
    while hi - lo > 1e-15 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = bracket(mid);
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let _ = f_lo;
    Ok(0.5 * (lo + hi))
}

/// Locate `alpha in (0, 1)` and `beta in (1, 4)` by bisection in the
/// log-gap variable.
pub fn find_roots(ctx: &PotentialContext) -> Result<RootPair> {
    let a = ctx.two_over_eps_pow;
    let b = ctx.kdot_over_k;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::NoRootInBracket {
            lo: 0.0,
            hi: 1.0,
            sign_lo: -1.0,
            sign_hi: -1.0,
        });
    }
    // far end: B (ln 2 - l) > A + slack, so the bracket factor is negative
    let far = -(a / b) - 10.0;
    // alpha: x = 1 - exp(l) runs from 1e-9 (l near 0) towards 1
    let log_delta = bisect_log_gap(ctx, Side::Below, far, (1.0 - 1e-9f64).ln())?;
    // beta: x = 1 + exp(l) runs from 4 (l = ln 3) towards 1
    let log_eta = bisect_log_gap(ctx, Side::Above, far, 3f64.ln())?;
    Ok(RootPair {
        log_delta,
        log_eta,
        t: ctx.t,
        eps: ctx.eps,
    })
}

/// Exponential gap brackets `2 e^{-X} < delta < 4 e^{-X}` and
/// `2 e^{-4X} < eta < 4 e^{-2X}` with `X = 1 / (2 c)`, evaluated in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBracketStatus {
    pub coefficient: f64,
    pub x: f64,
    pub delta_in_bracket: bool,
    pub eta_in_bracket: bool,
}

impl GapBracketStatus {
    pub fn evaluate(coefficient: f64, roots: &RootPair) -> Self {
        let x = 1.0 / (2.0 * coefficient);
        let (l2, l4) = (LN_2, 2.0 * LN_2);
        let d = roots.log_delta;
        let e = roots.log_eta;
        Self {
            coefficient,
            x,
            delta_in_bracket: l2 - x < d && d < l4 - x,
            eta_in_bracket: l2 - 4.0 * x < e && e < l4 - 2.0 * x,
        }
    }
}

/// Bracket status for the stated scalar `g_eps` and for the coefficient
/// `c = B / A` that solving `phi = 0` actually produces (`c = g_eps / 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketReport {
    pub stated: GapBracketStatus,
    pub derived: GapBracketStatus,
}

pub fn bracket_report(ctx: &PotentialContext, roots: &RootPair) -> BracketReport {
    BracketReport {
        stated: GapBracketStatus::evaluate(ctx.g_scale, roots),
        derived: GapBracketStatus::evaluate(ctx.well_coefficient(), roots),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCheck {
    pub interval: &'static str,
    pub expected_sign: i8,
    pub samples: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub root: &'static str,
    pub slope: f64,
    pub expected_sign: i8,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub intervals: Vec<IntervalCheck>,
    pub slopes: Vec<SlopeCheck>,
    /// `int_{-gamma}^{gamma} phi` for gamma = alpha, 1, beta.
    pub symmetric_integrals: Vec<(&'static str, f64)>,
    pub all_ok: bool,
}

/// Sample points of one interval, each given as `(log_gap, side)` relative to `+1`.
fn interval_samples(which: &'static str, roots: &RootPair, n: usize) -> Vec<(f64, Side)> {
    let s = |k: usize| (k as f64 + 0.5) / n as f64;
    let delta = roots.delta();
    let eta = roots.eta();
    (0..n)
        .map(|k| {
            let s = s(k);
            match which {
                // x = s * alpha, gap 1 - x = (1 - s) + s delta
                "(0,alpha)" => (((1.0 - s) + s * delta).ln(), Side::Below),
                // gap = s * delta
                "(alpha,1)" => (roots.log_delta + s.ln(), Side::Below),
                // gap = s * eta
                "(1,beta)" => (roots.log_eta + s.ln(), Side::Above),
                // x = beta + 3 s / (1 - s) spreads samples over (beta, inf)
                "(beta,inf)" => ((eta + 3.0 * s / (1.0 - s)).ln(), Side::Above),
                _ => unreachable!(),
            }
        })
        .collect()
}

/// Check the sign pattern of `phi` between its seven zeros, the slope signs
/// at those zeros, and the vanishing of the symmetric integrals.
pub fn verify_sign_structure(
    ctx: &PotentialContext,
    roots: &RootPair,
    samples_per_interval: usize,
) -> SignReport {
    // positive-axis intervals and the sign of phi there; the negative axis
    // mirrors with the opposite sign
    const POSITIVE: [(&str, &str, i8); 4] = [
        ("(0,alpha)", "(-alpha,0)", -1),
        ("(alpha,1)", "(-1,-alpha)", 1),
        ("(1,beta)", "(-beta,-1)", -1),
        ("(beta,inf)", "(-inf,-beta)", 1),
    ];
    let mut intervals = Vec::new();
    for (pos, neg, sign) in POSITIVE {
        let pts = interval_samples(pos, roots, samples_per_interval);
        let sign_of = |(lg, side): (f64, Side), mirror: bool| -> i8 {
            // x^2 - 1 carries the sign of the side even when it underflows
            let (_, br) = ctx.phi_factors_near_one(lg, side);
            let s = if br == 0.0 {
                0
            } else {
                (side.sign() * br.signum()) as i8
            };
            if mirror {
                -s
            } else {
                s
            }
        };
        let bad_pos = pts.iter().filter(|&&p| sign_of(p, false) != sign).count();
        let bad_neg = pts.iter().filter(|&&p| sign_of(p, true) != -sign).count();
        intervals.push(IntervalCheck {
            interval: pos,
            expected_sign: sign,
            samples: pts.len(),
            mismatches: bad_pos,
        });
        intervals.push(IntervalCheck {
            interval: neg,
            expected_sign: -sign,
            samples: pts.len(),
            mismatches: bad_neg,
        });
    }

    // phi' is even, so the negative roots share the slopes of the positive ones
    let at_alpha = ctx.phi_prime_near_one(roots.log_delta, Side::Below);
    let at_beta = ctx.phi_prime_near_one(roots.log_eta, Side::Above);
    let at_one = phi_prime(1.0, ctx);
    let at_zero = phi_prime(0.0, ctx);
    let mut slopes = Vec::new();
    for (root, slope, expected) in [
        ("-beta", at_beta, 1i8),
        ("-1", at_one, -1),
        ("-alpha", at_alpha, 1),
        ("0", at_zero, -1),
        ("alpha", at_alpha, 1),
        ("1", at_one, -1),
        ("beta", at_beta, 1),
    ] {
        let ok = if expected > 0 {
            slope > 0.0
        } else {
            slope < 0.0
        };
        slopes.push(SlopeCheck {
            root,
            slope,
            expected_sign: expected,
            ok,
        });
    }

    let symmetric_integrals = vec![
        ("alpha", symmetric_integral(ctx, roots.alpha())),
        ("1", symmetric_integral(ctx, 1.0)),
        ("beta", symmetric_integral(ctx, roots.beta())),
    ];
    let all_ok = intervals.iter().all(|c| c.mismatches == 0) && slopes.iter().all(|s| s.ok);
    SignReport {
        intervals,
        slopes,
        symmetric_integrals,
        all_ok,
    }
}

// 5-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Composite 5-point Gauss-Legendre quadrature of `func` over `[a, b]`.
pub fn gauss_legendre(func: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * w;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            sum += wt * func(c + 0.5 * w * x);
        }
    }
    0.5 * w * sum
}

/// `int_{-gamma}^{0} phi + int_{0}^{gamma} phi` on mirrored nodes.
pub fn symmetric_integral(ctx: &PotentialContext, gamma: f64) -> f64 {
    let left = gauss_legendre(|x| phi(x, ctx), -gamma, 0.0, 200);
    let right = gauss_legendre(|x| phi(x, ctx), 0.0, gamma, 200);
    left + right
}
