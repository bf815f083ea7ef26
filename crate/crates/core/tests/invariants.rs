//! Property tests for the structural invariants of each module.

use macflow::barrier::{barrier_w, threshold, BarrierSpec};
use macflow::domain::{Field, Grid};
use macflow::mcf::{extract_zero_level, radius_error, RadiusLaw};
use macflow::potential::{f, find_roots, g_fn, phi, F_fn, G_fn, PotentialContext, W_fn};
use macflow::schedule::Schedule;
use macflow::solver::{initial_datum, run_mac, Profile, Scheme, SolverConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn f_is_half_the_slope_of_its_primitive(x in -2.0f64..2.0) {
        prop_assume!(x.abs() > 1e-2 && (x.abs() - 1.0).abs() > 1e-2);
        let h = 1e-5;
        let d = (F_fn(x + h) - F_fn(x - h)) / (2.0 * h);
        prop_assert!((d - 2.0 * f(x)).abs() <= 1e-6 * (2.0 * f(x)).abs());
    }

    #[test]
    fn g_is_the_slope_of_its_primitive(x in -2.0f64..2.0) {
        prop_assume!(x.abs() > 1e-2 && (x.abs() - 1.0).abs() > 1e-3);
        let h = 1e-5;
        let d = (G_fn(x + h) - G_fn(x - h)) / (2.0 * h);
        prop_assert!((d - g_fn(x)).abs() <= 1e-6 * g_fn(x).abs());
    }

    #[test]
    fn parity(x in -3.0f64..3.0, eps in 0.01f64..0.5, frac in 0.0f64..1.0) {
        let s = Schedule::new(eps).unwrap();
        let ctx = PotentialContext::new(&s, frac * s.t_eps()).unwrap();
        prop_assert_eq!(phi(-x, &ctx), -phi(x, &ctx));
        prop_assert_eq!(F_fn(-x), F_fn(x));
        prop_assert_eq!(G_fn(-x), G_fn(x));
        prop_assert_eq!(W_fn(-x, &ctx), W_fn(x, &ctx));
    }

    #[test]
    fn threshold_is_the_barrier_at_the_region_offset(
        m in 0.05f64..2.0, eps in 0.02f64..0.5, frac in 0.0f64..0.9,
    ) {
        let s = Schedule::new(eps).unwrap();
        let t = frac;
        let extinction = 1.0;
        let r = 2.0 * (extinction - t).sqrt() - m * s.width(t) * s.log_eps_abs();
        prop_assume!(r > 0.0);
        let w = barrier_w(r, t, extinction, &s).unwrap();
        prop_assert!((w - threshold(m, eps)).abs() <= 1e-12);
    }

    #[test]
    fn barrier_distance_is_signed_from_the_shrinking_sphere(
        m in 0.1f64..1.0, r in 0.0f64..3.0, frac in 0.0f64..0.9,
    ) {
        let s = Schedule::new(0.1).unwrap();
        let spec = BarrierSpec::new(1.0, m, &s).unwrap();
        let t = frac * spec.t2;
        prop_assert!((spec.distance(r, t) - (2.0 * (1.0 - t).sqrt() - r)).abs() < 1e-12);
    }

    #[test]
    fn zero_level_is_exact_on_affine_data(root in 0.3f64..2.7, slope in 0.2f64..5.0) {
        let grid = Grid::radial(1, 3.0, 64).unwrap();
        let field = Field::from_fn(&grid, 0.0, |r| slope * (root - r));
        let got = extract_zero_level(&field).unwrap();
        prop_assert!((got - root).abs() < 1e-12);
    }
}

#[test]
fn wells_approach_one_as_eps_shrinks() {
    let gaps: Vec<f64> = [0.2, 0.1, 0.05, 0.02]
        .iter()
        .map(|&e| {
            let s = Schedule::new(e).unwrap();
            find_roots(&PotentialContext::new(&s, 0.0).unwrap())
                .unwrap()
                .log_delta
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn lower_well_is_smallest_at_the_terminal_time() {
    let s = Schedule::new(0.1).unwrap();
    let log_gaps: Vec<f64> = (0..=50)
        .map(|k| {
            let t = s.t_eps() * k as f64 / 50.0;
            find_roots(&PotentialContext::new(&s, t).unwrap())
                .unwrap()
                .log_delta
        })
        .collect();
    let last = *log_gaps.last().unwrap();
    assert!(log_gaps.iter().all(|&g| g <= last));
}

#[test]
fn discrepancy_total_is_insensitive_to_the_time_step() {
    // the sweep grid at eps = 0.1; the first-order implicit-explicit scheme
    // moves D by about 6% here, the second-order scheme by under 0.5%
    let eps = 0.1;
    let s = Schedule::new(eps).unwrap();
    let grid = Grid::radial(1, 2.0 * (1.0 + 15.0 * eps), 800).unwrap();
    let v0 = initial_datum(&grid, &s, Profile::Interface(1.0)).unwrap();
    let d = |dt: f64, scheme: Scheme| {
        let traj = run_mac(&SolverConfig::new(dt, scheme), &v0, &s).unwrap();
        traj.discrepancy_result(&s).d
    };
    let change = |scheme: Scheme| {
        let (a, b) = (d(eps * eps / 4.0, scheme), d(eps * eps / 8.0, scheme));
        (a - b).abs() / b.abs()
    };
    let second_order = change(Scheme::DiscreteGradient);
    assert!(second_order <= 5e-3, "{second_order}");
    assert!(change(Scheme::Imex) > second_order);
}

#[test]
fn interface_never_reexpands() {
    let eps = 0.1;
    let s = Schedule::new(eps).unwrap();
    let grid = Grid::radial(1, 2.0 * (1.0 + 15.0 * eps), 400).unwrap();
    let v0 = initial_datum(&grid, &s, Profile::Interface(1.0)).unwrap();
    let mut cfg = SolverConfig::new(eps * eps / 4.0, Scheme::DiscreteGradient);
    cfg.t_end = Some(0.4);
    cfg.dump_every = 1;
    let traj = run_mac(&cfg, &v0, &s).unwrap();
    let report = radius_error(&traj, &RadiusLaw::sphere(1, 1.0).unwrap(), 10.0 * eps);
    assert!(report.max_reexpansion <= 1e-3, "{}", report.max_reexpansion);
}
