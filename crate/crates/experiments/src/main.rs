use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use singmap_experiments::{run_experiment, verify, Experiment, ExperimentConfig, Profile};

#[derive(Parser)]
#[command(
    name = "singmap",
    version,
    about = "Singularities of Gaussian random maps into the plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML file of configuration keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,
    /// Output directory for rows.csv, summary.json and polylines.csv.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Critical-curve and contour lengths over bandwidths K.
    SweepBandlimited,
    /// Doughnut contour lengths over aspect ratios T = R / r.
    SweepDoughnut,
    /// Sphere closed form against direct simulation.
    SphereConsistency,
    /// The constants l and c.
    Constants,
    /// Pseudocusp counts against Kac–Rice.
    Pseudocusps,
    /// Polylines of one realization.
    Realize,
    /// Every experiment plus the invariant suite.
    Verify,
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = ExperimentConfig::load(cli.config.as_deref(), cli.profile)?.with_flags(cli.seed, cli.jobs, cli.out)?;
    let exp = match cli.command {
        Command::SweepBandlimited => Some(Experiment::BandlimitedSweep),
        Command::SweepDoughnut => Some(Experiment::DoughnutAsymptotics),
        Command::SphereConsistency => Some(Experiment::SphereConsistency),
        Command::Constants => Some(Experiment::Constants),
        Command::Pseudocusps => Some(Experiment::Pseudocusps),
        Command::Realize => Some(Experiment::SingleRealization),
        Command::Verify => None,
    };
    let rep = match exp {
        Some(e) => run_experiment(e, &cfg)?,
        None => verify(&cfg)?,
    };
    rep.write(&cfg.output_dir)?;
    for c in &rep.checks {
        let status = match (c.enabled, c.passed) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        eprintln!("{status} {}: observed {:.6} ({})", c.id, c.observed, c.description);
    }
    eprintln!("results written to {}", cfg.output_dir.display());
    Ok(rep.all_passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
