//! Accumulated discrepancy as eps decreases.
use macflow::cli::config::RunConfig;
use macflow::cli::sweep::run_sweep;

fn main() -> macflow::Result<()> {
    let cfg = RunConfig::from_json(r#"{"eps": [0.2, 0.1, 0.05, 0.025]}"#)?;
    let report = run_sweep(&cfg, 4)?;
    for row in &report.rows {
        if let Some(d) = row.result {
            println!(
                "eps {:<6} D {:.4e} D*|ln eps| {:.4e}",
                row.eps, d.d, d.d_times_logeps
            );
        }
    }
    println!(
        "fit coefficient {:.4e}, bounded {}",
        report.fit.coefficient, report.bounded_flag
    );
    Ok(())
}
