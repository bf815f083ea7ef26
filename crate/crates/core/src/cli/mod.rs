//! Command-line front end.

mod commands;
pub mod config;
pub mod output;
pub mod sweep;

pub use commands::{
    barrier_experiment, mcf_experiment, run_exit_code, BarrierOutcome, EXIT_CONFIG,
    EXIT_MAX_PRINCIPLE, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY_FAILED,
};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Result;
use config::RunConfig;

pub const OUTPUT_ENV: &str = "MACFLOW_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "macflow",
    version,
    about = "Modified Allen-Cahn flow experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Steps between snapshot dumps (overrides the configuration).
    #[arg(long = "dump-every", global = true)]
    pub dump_every: Option<usize>,
    /// Output directory (falls back to $MACFLOW_OUTPUT_DIR, then the configuration).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Potential,
    Energy,
    Barrier,
    Mcf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration and write summary.json.
    Run,
    /// Discrepancy totals over a list of eps values.
    Sweep,
    /// Wells, sign structure and bracket status of the nonlinearity.
    VerifyPotential,
    /// Per-step energy balance as energy.csv.
    VerifyEnergy,
    /// Comparison with the shrinking-ball barrier.
    CompareBarrier {
        #[arg(long = "T")]
        extinction: Option<f64>,
        #[arg(long = "M")]
        m: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Interface radius against the shrinking-sphere law.
    McfTest,
    /// Run one verification suite by name.
    Verify { suite: Suite },
}

fn output_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common
        .output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("macflow-output"))
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::single(0.1),
    };
    if let Some(d) = common.dump_every {
        cfg.dump_every = d;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = load_config(&cli.common)?;
    let out = output_dir(&cli.common, &cfg);
    match &cli.command {
        Command::Run => commands::cmd_run(&cfg, &out),
        Command::Sweep => commands::cmd_sweep(&cfg, cli.common.jobs, &out),
        Command::VerifyPotential
        | Command::Verify {
            suite: Suite::Potential,
        } => commands::cmd_verify_potential(&cfg, &out),
        Command::VerifyEnergy
        | Command::Verify {
            suite: Suite::Energy,
        } => commands::cmd_verify_energy(&cfg, &out),
        Command::CompareBarrier { extinction, m, eps } => {
            commands::cmd_compare_barrier(&cfg, *eps, *extinction, *m, &out)
        }
        Command::Verify {
            suite: Suite::Barrier,
        } => commands::cmd_compare_barrier(&cfg, None, None, None, &out),
        Command::McfTest | Command::Verify { suite: Suite::Mcf } => {
            commands::cmd_mcf_test(&cfg, &out)
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_CONFIG,
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
