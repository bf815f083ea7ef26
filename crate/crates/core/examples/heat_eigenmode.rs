//! Decay of a Neumann cosine mode under the heat propagator on a line.
use macflow::domain::{Field, Grid};
use macflow::solver::solve_heat;

fn main() -> macflow::Result<()> {
    let len = 1.0;
    let k = std::f64::consts::PI / len;
    for n in [32, 64, 128, 256] {
        let grid = Grid::line(len, n)?;
        let v0 = Field::from_fn(&grid, 0.0, |x| (k * x).cos());
        let t = 0.05;
        let v = solve_heat(&v0, t)?;
        let decay = (-k * k * t).exp();
        let err = v
            .values
            .iter()
            .zip(grid.centers())
            .map(|(a, &x)| (a - decay * (k * x).cos()).abs())
            .fold(0.0, f64::max);
        println!("cells {n:>4} max error {err:.3e}");
    }
    Ok(())
}
