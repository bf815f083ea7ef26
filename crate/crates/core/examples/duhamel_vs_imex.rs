//! Window-wise fixed-point iteration against direct time stepping.
use macflow::domain::Grid;
use macflow::schedule::Schedule;
use macflow::solver::{
    duhamel_solve, initial_datum, run_mac, window_length, Profile, Scheme, SolverConfig,
    DUHAMEL_NODES_PER_WINDOW,
};

fn main() -> macflow::Result<()> {
    let eps = 0.2;
    let s = Schedule::new(eps)?;
    let grid = Grid::radial(1, 8.0, 128)?;
    let v0 = initial_datum(&grid, &s, Profile::Interface(1.0))?;
    let windows = 5;
    let fixed = duhamel_solve(&v0, &s, windows)?;
    let span = windows as f64 * window_length(&s);
    let node = window_length(&s) / DUHAMEL_NODES_PER_WINDOW as f64;
    for div in [1.0, 4.0, 16.0] {
        let mut cfg = SolverConfig::new(node / div, Scheme::Imex);
        cfg.t_end = Some(span);
        let direct = run_mac(&cfg, &v0, &s)?;
        println!(
            "dt = node/{div:<3} sup difference {:.3e}",
            fixed.final_field.sup_distance(&direct.final_field)
        );
    }
    Ok(())
}
