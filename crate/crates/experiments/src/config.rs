//! Run configuration: profile defaults, then a flat TOML file, then flags.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use singmap_core::geometry::GridSpec;
use singmap_core::kac_rice::QuadratureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BandlimitedSweep,
    DoughnutAsymptotics,
    SphereConsistency,
    Constants,
    Pseudocusps,
    SingleRealization,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Small bandwidths, a 256 grid and 10^4 Monte Carlo samples.
    Smoke,
    #[default]
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profile: Profile,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    pub output_dir: PathBuf,

    /// Realizations per bandwidth in the bandlimited sweep.
    pub trials: usize,
    pub k_values: Vec<usize>,

    pub doughnut_trials: usize,
    /// Aspect ratios `T = R / r`.
    pub t_values: Vec<f64>,
    pub big_r: f64,
    /// Second radius of the linear-scaling check, at the largest `T`.
    pub big_r_scaled: f64,

    pub sphere_dims: Vec<usize>,
    pub c_prime: f64,
    pub c_double_prime: f64,

    pub pseudocusp_k: usize,
    pub pseudocusp_trials: usize,

    pub oracle_k: usize,
    pub oracle_trials: usize,

    pub realize_k: usize,
    pub realize_trial: u64,

    /// Samples for the constants and the sphere comparison.
    pub mc_samples: u64,
    /// Samples for length predictions on the torus.
    pub prediction_samples: u64,
    /// Samples for length predictions on the doughnut, where each draw
    /// visits every spatial node.
    pub doughnut_prediction_samples: u64,
    pub pseudocusp_samples: u64,

    pub resolution: usize,
    pub refinement: usize,
    pub tolerance: f64,
    pub theta_nodes: usize,
    pub spatial_nodes: usize,
    /// Quadrature of the doughnut predictions, which visit every spatial
    /// node per draw.
    pub doughnut_theta_nodes: usize,
    pub doughnut_spatial_nodes: usize,
}

impl ExperimentConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let full = Self {
            profile,
            seed: 42,
            jobs: None,
            output_dir: PathBuf::from("out"),
            trials: 20,
            k_values: (2..=10).collect(),
            doughnut_trials: 100,
            t_values: vec![5.0, 10.0, 20.0, 40.0],
            big_r: 1.0,
            big_r_scaled: 2.0,
            sphere_dims: vec![2, 3],
            c_prime: 1.0,
            c_double_prime: 1.0,
            pseudocusp_k: 5,
            pseudocusp_trials: 200,
            oracle_k: 3,
            oracle_trials: 20,
            realize_k: 8,
            realize_trial: 0,
            mc_samples: 1_000_000,
            prediction_samples: 100_000,
            doughnut_prediction_samples: 2_000,
            pseudocusp_samples: 200_000,
            resolution: 512,
            refinement: 5,
            tolerance: 1e-10,
            theta_nodes: 64,
            spatial_nodes: 32,
            doughnut_theta_nodes: 32,
            doughnut_spatial_nodes: 16,
        };
        match profile {
            Profile::Full => full,
            Profile::Smoke => Self {
                k_values: vec![2, 3],
                doughnut_trials: 20,
                pseudocusp_k: 3,
                pseudocusp_trials: 40,
                oracle_trials: 5,
                realize_k: 3,
                mc_samples: 10_000,
                prediction_samples: 10_000,
                doughnut_prediction_samples: 200,
                pseudocusp_samples: 10_000,
                resolution: 256,
                ..full
            },
        }
    }

    /// Profile defaults overlaid with the keys of a flat TOML document. A
    /// `profile` key in the document selects the defaults unless
    /// `profile_flag` is given.
    pub fn from_toml(text: &str, profile_flag: Option<Profile>) -> Result<Self> {
        let doc: toml::Table = text.parse().context("config is not valid TOML")?;
        let profile = match (profile_flag, doc.get("profile")) {
            (Some(p), _) => p,
            (None, Some(v)) => v.clone().try_into().context("invalid profile")?,
            (None, None) => Profile::default(),
        };
        let mut base = toml::Table::try_from(Self::for_profile(profile))?;
        for (k, v) in doc {
            if k == "profile" {
                continue;
            }
            if !base.contains_key(&k) && k != "jobs" {
                bail!("unknown config key `{k}`");
            }
            base.insert(k, v);
        }
        let cfg: Self = base.try_into().context("config value has the wrong type")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, profile_flag: Option<Profile>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::from_toml(&text, profile_flag)
            }
            None => Ok(Self::for_profile(profile_flag.unwrap_or_default())),
        }
    }

    /// Command-line flags win over the file and the profile.
    pub fn with_flags(mut self, seed: Option<u64>, jobs: Option<usize>, out: Option<PathBuf>) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if jobs.is_some() {
            self.jobs = jobs;
        }
        if let Some(o) = out {
            self.output_dir = o;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.doughnut_trials == 0 || self.pseudocusp_trials == 0 || self.oracle_trials == 0 {
            bail!("trial counts must be at least 1");
        }
        if self.k_values.contains(&0) || self.pseudocusp_k == 0 || self.oracle_k == 0 || self.realize_k == 0 {
            bail!("bandwidths must be at least 1");
        }
        if self.t_values.iter().any(|t| !(*t > 1.0)) {
            bail!("aspect ratios T = R / r must exceed 1");
        }
        if !(self.big_r > 0.0 && self.big_r_scaled > 0.0) {
            bail!("radii must be positive");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        self.grid().validate()?;
        self.quad().validate()?;
        self.doughnut_quad().validate()?;
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            resolution: self.resolution,
            refinement: self.refinement,
            tolerance: self.tolerance,
            ..GridSpec::default()
        }
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            theta_nodes: self.theta_nodes,
            spatial_nodes: self.spatial_nodes,
        }
    }

    pub fn doughnut_quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            theta_nodes: self.doughnut_theta_nodes,
            spatial_nodes: self.doughnut_spatial_nodes,
        }
    }

    /// Checks tied to the paper-scale sample sizes only count in the full
    /// profile.
    pub fn full_scale(&self) -> bool {
        self.profile == Profile::Full
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_profile() {
        let cfg = ExperimentConfig::from_toml("profile = \"smoke\"\ntrials = 3\nseed = 7\n", None).unwrap();
        assert_eq!(cfg.profile, Profile::Smoke);
        assert_eq!(cfg.resolution, 256);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn profile_flag_beats_file() {
        let cfg = ExperimentConfig::from_toml("profile = \"smoke\"\n", Some(Profile::Full)).unwrap();
        assert_eq!(cfg.resolution, 512);
    }

    #[test]
    fn flags_beat_file() {
        let cfg = ExperimentConfig::from_toml("seed = 7\njobs = 3\noutput_dir = \"a\"\n", None).unwrap();
        assert_eq!(cfg.jobs, Some(3));
        let cfg = cfg.with_flags(Some(9), Some(1), Some(PathBuf::from("b"))).unwrap();
        assert_eq!((cfg.seed, cfg.jobs, cfg.output_dir), (9, Some(1), PathBuf::from("b")));
        let kept = ExperimentConfig::from_toml("seed = 7\n", None)
            .unwrap()
            .with_flags(None, None, None)
            .unwrap();
        assert_eq!(kept.seed, 7);
        assert!(ExperimentConfig::default().with_flags(None, Some(0), None).is_err());
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        assert!(ExperimentConfig::from_toml("tirals = 3\n", None).is_err());
        assert!(ExperimentConfig::from_toml("trials = 0\n", None).is_err());
        assert!(ExperimentConfig::from_toml("resolution = 32\n", None).is_err());
        assert!(ExperimentConfig::from_toml("trials = \"many\"\n", None).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::for_profile(Profile::Smoke);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text, None).unwrap(), cfg);
    }
}
