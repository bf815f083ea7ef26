//! Wells of the time-dependent nonlinearity and its sign structure.
use macflow::potential::{find_roots, verify_sign_structure, PotentialContext};
use macflow::schedule::Schedule;

fn main() -> macflow::Result<()> {
    for eps in [0.2, 0.1, 0.05] {
        let s = Schedule::new(eps)?;
        for t in [0.0, 0.5 * s.t_eps(), s.t_eps()] {
            let ctx = PotentialContext::new(&s, t)?;
            let roots = find_roots(&ctx)?;
            let signs = verify_sign_structure(&ctx, &roots, 1000);
            println!(
                "eps {eps:<5} t {t:<8.4} ln(1-alpha) {:>10.3} ln(beta-1) {:>10.3} signs ok {}",
                roots.log_delta, roots.log_eta, signs.all_ok
            );
        }
    }
    Ok(())
}
