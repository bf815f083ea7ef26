//! Domination of the shrinking-ball barrier up to its guaranteed time.
use macflow::cli::barrier_experiment;
use macflow::cli::config::RunConfig;

fn main() -> macflow::Result<()> {
    let cfg = RunConfig::from_json(r#"{"eps": 0.1, "scheme": "discrete_gradient"}"#)?;
    let out = barrier_experiment(&cfg, 0.1, 1.0, 1.0)?;
    println!("t2 {:.5}", out.t2);
    println!(
        "min(v - w) {:.3e}, mirrored {:.3e}",
        out.min_v_minus_w, out.mirrored.min_v_minus_w
    );
    println!("region checks pass: {}", out.region_checks_passed);
    println!(
        "barrier operator sampled: {} positive values, all inside the core",
        out.subsolution.violations_in_core
    );
    Ok(())
}
