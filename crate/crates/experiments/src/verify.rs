//! Running experiments by name, alone or as the full verification suite.

use anyhow::Result;
use std::time::Instant;

use crate::config::{Experiment, ExperimentConfig};
use crate::experiments::{bandlimited, constants, doughnut, invariants, pseudocusps, realize, sphere};
use crate::report::Report;

/// Everything `verify` runs, in order.
pub const SUITE: [Experiment; 6] = [
    Experiment::Constants,
    Experiment::SphereConsistency,
    Experiment::DoughnutAsymptotics,
    Experiment::Pseudocusps,
    Experiment::BandlimitedSweep,
    Experiment::SingleRealization,
];

pub fn name(e: Experiment) -> &'static str {
    match e {
        Experiment::BandlimitedSweep => bandlimited::NAME,
        Experiment::DoughnutAsymptotics => doughnut::NAME,
        Experiment::SphereConsistency => sphere::NAME,
        Experiment::Constants => constants::NAME,
        Experiment::Pseudocusps => pseudocusps::NAME,
        Experiment::SingleRealization => realize::NAME,
    }
}

fn dispatch(e: Experiment, cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    match e {
        Experiment::BandlimitedSweep => bandlimited::run(cfg, rep),
        Experiment::DoughnutAsymptotics => doughnut::run(cfg, rep),
        Experiment::SphereConsistency => sphere::run(cfg, rep),
        Experiment::Constants => constants::run(cfg, rep),
        Experiment::Pseudocusps => pseudocusps::run(cfg, rep),
        Experiment::SingleRealization => realize::run(cfg, rep),
    }
}

fn in_workers<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j).build()?.install(f),
        None => f(),
    })
}

fn run_steps(cfg: &ExperimentConfig, experiments: &[Experiment], with_invariants: bool) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new(cfg);
    in_workers(cfg, || -> Result<()> {
        for &e in experiments {
            let start = Instant::now();
            rep.experiments.push(name(e).into());
            dispatch(e, cfg, &mut rep)?;
            eprintln!("{}: done in {:.1} s", name(e), start.elapsed().as_secs_f64());
        }
        if with_invariants {
            let start = Instant::now();
            rep.experiments.push(invariants::NAME.into());
            invariants::run(cfg, &mut rep)?;
            eprintln!("{}: done in {:.1} s", invariants::NAME, start.elapsed().as_secs_f64());
        }
        Ok(())
    })??;
    Ok(rep)
}

/// One experiment.
pub fn run_experiment(e: Experiment, cfg: &ExperimentConfig) -> Result<Report> {
    run_steps(cfg, &[e], false)
}

/// Every experiment followed by the invariant suite.
pub fn verify(cfg: &ExperimentConfig) -> Result<Report> {
    run_steps(cfg, &SUITE, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Profile;
    use crate::report::read_rows_csv;

    #[test]
    fn smoke_suite_runs_and_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            output_dir: dir.path().to_path_buf(),
            trials: 3,
            doughnut_trials: 5,
            pseudocusp_trials: 5,
            oracle_trials: 3,
            jobs: Some(2),
            ..ExperimentConfig::for_profile(Profile::Smoke)
        };
        let rep = verify(&cfg).unwrap();
        rep.write(dir.path()).unwrap();
        for f in ["rows.csv", "summary.json", "polylines.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let rows = read_rows_csv(std::fs::File::open(dir.path().join("rows.csv")).unwrap()).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.schema_version == 1 && r.min <= r.mean && r.mean <= r.max));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(json["schema_version"], 1);
        let failed: Vec<_> = rep.failed().map(|c| c.id.clone()).collect();
        assert!(rep.all_passed, "{failed:?}");
    }
}
