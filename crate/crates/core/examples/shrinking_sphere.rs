//! Interface radius of a shrinking circle against the curvature-flow law.
use macflow::domain::Grid;
use macflow::mcf::{radius_error, RadiusLaw};
use macflow::schedule::Schedule;
use macflow::solver::{initial_datum, run_mac, Profile, Scheme, SolverConfig};

fn main() -> macflow::Result<()> {
    let eps = 0.05;
    let s = Schedule::new(eps)?;
    let r_max = 2.0 * (1.0 + 15.0 * eps);
    let grid = Grid::radial(1, r_max, (16.0 * r_max / eps).ceil() as usize)?;
    let v0 = initial_datum(&grid, &s, Profile::Interface(1.0))?;
    let mut cfg = SolverConfig::new(eps * eps / 4.0, Scheme::DiscreteGradient);
    cfg.t_end = Some(0.3);
    cfg.dump_every = 8;
    let traj = run_mac(&cfg, &v0, &s)?;
    let report = radius_error(&traj, &RadiusLaw::sphere(1, 1.0)?, 10.0 * eps);
    for smp in &report.samples {
        println!(
            "t {:.4} radius {:.5} exact {:.5} rel {:.2e}",
            smp.t, smp.r_extracted, smp.r_exact, smp.rel_error
        );
    }
    println!("max relative error {:.3e}", report.max_rel_error);
    Ok(())
}
