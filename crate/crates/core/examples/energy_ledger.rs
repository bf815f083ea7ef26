//! Energy balance terms for the implicit and the energy-consistent scheme.
use macflow::domain::Grid;
use macflow::measures::{alt_energy_residual, energy_residual};
use macflow::schedule::Schedule;
use macflow::solver::{initial_datum, run_mac, Profile, Scheme, SolverConfig};

fn main() -> macflow::Result<()> {
    let eps = 0.1;
    let s = Schedule::new(eps)?;
    let grid = Grid::radial(1, 5.0, 512)?;
    let v0 = initial_datum(&grid, &s, Profile::Interface(1.0))?;
    for scheme in [Scheme::Imex, Scheme::DiscreteGradient] {
        let cfg = SolverConfig::new(eps * eps / 4.0, scheme);
        let traj = run_mac(&cfg, &v0, &s)?;
        let l = traj.ledger;
        println!(
            "{scheme:?}: mu(t) {:.6} dissipation {:.6} xi {:.3e} G {:.3e} mu0 {:.6} residual {:.3e} (alt {:.3e})",
            l.term_mu_t,
            l.term_time_deriv,
            l.term_xi,
            l.term_g,
            l.mu_0,
            energy_residual(&l),
            alt_energy_residual(&l)
        );
    }
    Ok(())
}
