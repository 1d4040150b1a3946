//! Rows, named scalar results and pass/fail checks of a run, with their
//! CSV and JSON forms.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use singmap_core::fields::SCHEMA_VERSION;
use singmap_core::kac_rice::{McEstimate, ResultRecord};

use crate::config::ExperimentConfig;
use crate::stats::Summary;

/// One parameter value of a sweep and one measured quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub experiment: String,
    /// `K`, `T` or `n`.
    pub parameter: String,
    pub value: f64,
    pub quantity: String,
    pub n_trials: usize,
    /// Per-trial values joined with `;`.
    pub trials: String,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
    pub prediction: Option<f64>,
    pub prediction_stderr: Option<f64>,
    pub schema_version: u32,
}

impl SweepRow {
    pub fn new(experiment: &str, parameter: &str, value: f64, quantity: &str, trials: &[f64], s: &Summary) -> Self {
        Self {
            experiment: experiment.into(),
            parameter: parameter.into(),
            value,
            quantity: quantity.into(),
            n_trials: s.n,
            trials: trials.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
            mean: s.mean,
            stderr: s.stderr,
            min: s.min,
            max: s.max,
            prediction: None,
            prediction_stderr: None,
            schema_version: SCHEMA_VERSION,
        }
    }

    pub fn with_prediction(mut self, e: &McEstimate) -> Self {
        self.prediction = Some(e.mean);
        self.prediction_stderr = Some(e.stderr);
        self
    }

    pub fn trial_values(&self) -> Vec<f64> {
        self.trials
            .split(';')
            .filter(|s| !s.is_empty())
            .filter_map(|s| s.parse().ok())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Disabled checks are reported but do not set the exit code.
    pub enabled: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiments: Vec<String>,
    pub config: Option<ExperimentConfig>,
    /// Scalar results under dotted keys such as `constants.l.mean`.
    pub values: BTreeMap<String, f64>,
    pub records: Vec<ResultRecord>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config: Some(cfg.clone()),
            all_passed: true,
            ..Self::default()
        }
    }

    pub fn put(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn put_estimate(&mut self, prefix: &str, e: &McEstimate) {
        self.put(format!("{prefix}.mean"), e.mean);
        self.put(format!("{prefix}.stderr"), e.stderr);
        self.put(format!("{prefix}.n_samples"), e.n_samples as f64);
        self.put(format!("{prefix}.n_discarded"), e.n_discarded as f64);
    }

    pub fn put_summary(&mut self, prefix: &str, s: &Summary) {
        self.put(format!("{prefix}.mean"), s.mean);
        self.put(format!("{prefix}.stderr"), s.stderr);
        self.put(format!("{prefix}.min"), s.min);
        self.put(format!("{prefix}.max"), s.max);
        self.put(format!("{prefix}.n"), s.n as f64);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// Records a check that passes when `|observed - expected| <= tolerance`.
    pub fn check_abs(
        &mut self,
        id: &str,
        description: &str,
        observed: f64,
        expected: f64,
        tolerance: f64,
        enabled: bool,
    ) {
        let passed = (observed - expected).abs() <= tolerance;
        self.check(id, description, observed, expected, tolerance, passed, enabled);
    }

    /// Records a check that passes when `observed <= bound`.
    pub fn check_below(&mut self, id: &str, description: &str, observed: f64, bound: f64, enabled: bool) {
        self.check(id, description, observed, 0.0, bound, observed <= bound, enabled);
    }

    #[allow(clippy::too_many_arguments)]
    pub fn check(
        &mut self,
        id: &str,
        description: &str,
        observed: f64,
        expected: f64,
        tolerance: f64,
        passed: bool,
        enabled: bool,
    ) {
        if enabled && !passed {
            self.all_passed = false;
        }
        self.checks.push(Check {
            id: id.into(),
            description: description.into(),
            observed,
            expected,
            tolerance,
            passed,
            enabled,
        });
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.enabled && !c.passed)
    }

    pub fn write_rows_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wtr.write_record([
                "experiment",
                "parameter",
                "value",
                "quantity",
                "n_trials",
                "trials",
                "mean",
                "stderr",
                "min",
                "max",
                "prediction",
                "prediction_stderr",
                "schema_version",
            ])?;
        }
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Writes `rows.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let rows = dir.join("rows.csv");
        self.write_rows_csv(fs::File::create(&rows).with_context(|| format!("writing {}", rows.display()))?)?;
        let summary = dir.join("summary.json");
        fs::write(&summary, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", summary.display()))?;
        Ok(())
    }
}

pub fn read_rows_csv<R: std::io::Read>(r: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::summarize;

    #[test]
    fn csv_header_carries_schema_version() {
        let mut rep = Report::default();
        let mut buf = Vec::new();
        rep.write_rows_csv(&mut buf).unwrap();
        let header = String::from_utf8(buf).unwrap();
        assert!(header.trim_end().ends_with(",schema_version"));

        let xs = [1.0, 2.5, 4.0];
        rep.rows.push(SweepRow::new(
            "bandlimited-sweep",
            "K",
            3.0,
            "critical_length",
            &xs,
            &summarize(&xs),
        ));
        let mut buf = Vec::new();
        rep.write_rows_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().ends_with(",schema_version"));
        assert!(lines.next().unwrap().ends_with(",1"));
        let back = read_rows_csv(text.as_bytes()).unwrap();
        assert_eq!(back, rep.rows);
        assert_eq!(back[0].trial_values(), xs);
    }

    #[test]
    fn disabled_failures_do_not_fail_the_run() {
        let mut rep = Report::new(&ExperimentConfig::default());
        rep.check_abs("a", "", 1.0, 2.0, 0.1, false);
        assert!(rep.all_passed);
        rep.check_below("b", "", 3.0, 2.0, true);
        assert!(!rep.all_passed);
        assert_eq!(rep.failed().count(), 1);
    }
}
