//! Kac–Rice expectations evaluated by Gaussian conditioning, Monte Carlo
//! and quadrature.

pub mod constants;
pub mod doughnut;
pub mod invariance;
pub mod length;
pub mod mc;
pub mod pseudocusps;
pub mod sphere;

pub use constants::{constant_c_bandlimited, constant_c_golden, constant_l};
pub use doughnut::{doughnut_contour_asymptotic, DoughnutAsymptotic};
pub use invariance::integrand_coordinate_invariance_check;
pub use length::{
    expected_length_general, expected_length_iid, length_estimates_general, length_estimates_iid, LengthEstimates,
    TargetEstimates,
};
pub use mc::McEstimate;
pub use pseudocusps::{expected_pseudocusps, pseudocusp_estimates, PseudocuspEstimates, PseudocuspKind};
pub use sphere::{expected_contour_sphere, sphere_contour_estimates, SphereContour};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{model_moments, FieldModel, JetMoments};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Panels of the periodic trapezoid rule on `[0, pi)`; must be even so
    /// that `pi/2` is a node.
    pub theta_nodes: usize,
    /// Nodes per chart dimension.
    pub spatial_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            theta_nodes: 64,
            spatial_nodes: 32,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta_nodes < 8 || self.spatial_nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 8 nodes, got theta {} and spatial {}",
                self.theta_nodes, self.spatial_nodes
            )));
        }
        if !self.theta_nodes.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "theta_nodes must be even so that pi/2 is a node".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    CriticalCurve,
    Contour,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthQuery {
    pub target: Target,
    pub index_filter: Option<usize>,
    pub pareto_only: bool,
}

impl LengthQuery {
    pub fn total(target: Target) -> Self {
        Self {
            target,
            index_filter: None,
            pareto_only: false,
        }
    }

    pub fn index(target: Target, k: usize) -> Self {
        Self {
            target,
            index_filter: Some(k),
            pareto_only: false,
        }
    }

    pub fn pareto(target: Target) -> Self {
        Self {
            target,
            index_filter: None,
            pareto_only: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Chart {
    /// `[0, period)^dim` with periodic boundary.
    PeriodicBox { period: f64 },
    /// A homogeneous space of the given volume where only one point is needed.
    Homogeneous { volume: f64 },
}

type MomentFn = dyn Fn(&[f64]) -> Result<JetMoments> + Send + Sync;

/// Point-to-moments map with its chart.
#[derive(Clone)]
pub struct MomentSource {
    pub dim: usize,
    pub chart: Chart,
    pub stationary: bool,
    moments: Arc<MomentFn>,
}

impl std::fmt::Debug for MomentSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MomentSource")
            .field("dim", &self.dim)
            .field("chart", &self.chart)
            .field("stationary", &self.stationary)
            .finish()
    }
}

/// `vol(S^n) = 2 pi^((n+1)/2) / Gamma((n+1)/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

impl MomentSource {
    pub fn custom<F>(dim: usize, chart: Chart, stationary: bool, moments: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<JetMoments> + Send + Sync + 'static,
    {
        if matches!(chart, Chart::Homogeneous { .. }) && !stationary {
            return Err(Error::InvalidParameter(
                "a homogeneous chart needs stationary moments".into(),
            ));
        }
        Ok(Self {
            dim,
            chart,
            stationary,
            moments: Arc::new(moments),
        })
    }

    pub fn from_model(model: FieldModel) -> Result<Self> {
        model.validate()?;
        let chart = match model {
            FieldModel::IsotropicSphere { n, .. } => Chart::Homogeneous {
                volume: sphere_volume(n),
            },
            _ => Chart::PeriodicBox {
                period: model.chart_period().expect("periodic"),
            },
        };
        Self::custom(model.dim(), chart, model.is_stationary(), move |x| {
            model_moments(model, x)
        })
    }

    pub fn moments_at(&self, x: &[f64]) -> Result<JetMoments> {
        (self.moments)(x)
    }

    /// Quadrature nodes and weights over the chart. A stationary source
    /// has a constant integrand, so one node carries the whole volume.
    /// Periodic charts use cell midpoints, which keeps nodes off the
    /// coordinate lines where embedded models tend to degenerate.
    pub fn nodes(&self, quad: &QuadratureSpec) -> Vec<(Vec<f64>, f64)> {
        match self.chart {
            Chart::Homogeneous { volume } => vec![(vec![0.0; self.dim], volume)],
            Chart::PeriodicBox { period } if self.stationary => {
                vec![(vec![0.0; self.dim], period.powi(self.dim as i32))]
            }
            Chart::PeriodicBox { period } => {
                let s = quad.spatial_nodes;
                let h = period / s as f64;
                let count = s.pow(self.dim as u32);
                (0..count)
                    .map(|mut idx| {
                        let mut x = vec![0.0; self.dim];
                        for c in x.iter_mut() {
                            *c = ((idx % s) as f64 + 0.5) * h;
                            idx /= s;
                        }
                        (x, h.powi(self.dim as i32))
                    })
                    .collect()
            }
        }
    }
}

/// One emitted result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRecord {
    pub formula_id: String,
    pub model: String,
    pub parameters: serde_json::Value,
    pub query: serde_json::Value,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub n_discarded: u64,
    pub seed: u64,
    pub wall_time_ms: u64,
}

impl ResultRecord {
    pub fn new(
        formula_id: &str,
        model: &str,
        parameters: serde_json::Value,
        query: serde_json::Value,
        est: &McEstimate,
        wall_time_ms: u64,
    ) -> Self {
        Self {
            formula_id: formula_id.to_string(),
            model: model.to_string(),
            parameters,
            query,
            estimate: est.mean,
            stderr: est.stderr,
            n_samples: est.n_samples,
            n_discarded: est.n_discarded,
            seed: est.seed,
            wall_time_ms,
        }
    }
}

/// Recognised `formula_id` values.
pub const FORMULA_IDS: [&str; 9] = [
    "thm2.6",
    "thm2.9",
    "thm2.13",
    "thm3.1",
    "thm4.2",
    "thm5.1",
    "const_l",
    "const_c",
    "doughnut_c",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec {
            theta_nodes: 9,
            spatial_nodes: 32
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec {
            theta_nodes: 64,
            spatial_nodes: 4
        }
        .validate()
        .is_err());
    }

    #[test]
    fn node_weights_sum_to_volume() {
        let src = MomentSource::from_model(FieldModel::DoughnutProjection {
            big_r: 1.0,
            small_r: 0.2,
        })
        .unwrap();
        let nodes = src.nodes(&QuadratureSpec::default());
        assert_eq!(nodes.len(), 32 * 32);
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((total - 4.0 * PI * PI).abs() < 1e-9);
        let torus = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 2 }).unwrap();
        assert_eq!(torus.nodes(&QuadratureSpec::default()), vec![(vec![0.0, 0.0], 1.0)]);
    }
}
