//! Singularities of sampled planar maps on a periodic 2-d chart.

pub mod export;
pub mod extract;
pub mod measure;
pub mod pseudocusps;

pub use export::{read_polylines_csv, write_polylines_csv, PolylineRow};
pub use extract::{extract_critical_curve, Extraction, PolyVertex, SingularPolyline};
pub use measure::{lemma_length_oracle, measure, measure_lengths, LengthReport, OracleLengths};
pub use pseudocusps::{count_pseudocusps, critical_points, CriticalPoint, PseudocuspCounts};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Jet2;
use crate::gaussian::{biparametric_index, SymMatrix, INDEX_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Nodes per axis.
    pub resolution: usize,
    /// Newton steps per edge crossing.
    pub refinement: usize,
    /// Bound on `|det Dh|` at refined vertices.
    pub tolerance: f64,
    /// Chart position of node `(0, 0)`.
    pub origin: [f64; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: 512,
            refinement: 5,
            tolerance: 1e-10,
            origin: [0.0, 0.0],
        }
    }
}

impl GridSpec {
    pub fn with_resolution(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 64 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be >= 64, got {}",
                self.resolution
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("grid tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Shortest representative of `b - a` on a periodic axis.
pub(crate) fn wrap_delta(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// `(V_x, V_theta)` of the pencil at angle `theta`.
pub(crate) fn pencil(jet: &Jet2, theta: f64) -> (SymMatrix, [f64; 2]) {
    let (s, c) = theta.sin_cos();
    let vx = jet.hess_f.lincomb(c, &jet.hess_g, s);
    let vt = [
        -s * jet.grad_f[0] + c * jet.grad_g[0],
        -s * jet.grad_f[1] + c * jet.grad_g[1],
    ];
    (vx, vt)
}

/// Angle in `[0, pi)` of the unit vector `(a, b)` minimising
/// `|a grad f + b grad g|`, or `None` when both gradients are negligible
/// against `scale`.
pub(crate) fn null_angle(gf: [f64; 2], gg: [f64; 2], scale: f64) -> Option<f64> {
    let p = gf[0] * gf[0] + gf[1] * gf[1];
    let s = gg[0] * gg[0] + gg[1] * gg[1];
    let q = gf[0] * gg[0] + gf[1] * gg[1];
    if !(p + s > (1e-9 * scale).powi(2)) {
        return None;
    }
    let mu = 0.5 * (p + s) - (0.25 * (p - s) * (p - s) + q * q).sqrt();
    let u = [q, mu - p];
    let w = [mu - s, q];
    let v = if u[0].hypot(u[1]) >= w[0].hypot(w[1]) { u } else { w };
    let theta = v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI);
    Some(if theta >= std::f64::consts::PI { 0.0 } else { theta })
}

/// Lifted angle and biparametric index at a chart point.
pub(crate) fn lift(jet: &Jet2, scale: f64) -> (Option<f64>, Option<usize>) {
    match null_angle(jet.grad_f, jet.grad_g, scale) {
        None => (None, None),
        Some(theta) => {
            let (vx, vt) = pencil(jet, theta);
            (Some(theta), biparametric_index(&vx, &vt, INDEX_TOL).ok())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn null_angle_of_rank_one_pairs() {
        let t = null_angle([1.0, 2.0], [-2.0, -4.0], 1.0).unwrap();
        // cos t (1, 2) + sin t (-2, -4) = 0 -> tan t = 1/2
        assert!((t - 0.5f64.atan()).abs() < 1e-12);
        assert_eq!(null_angle([0.0, 0.0], [0.0, 3.0], 1.0), Some(0.0));
        assert!((null_angle([0.0, 3.0], [0.0, 0.0], 1.0).unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(null_angle([0.0, 0.0], [0.0, 0.0], 1.0), None);
    }

    #[test]
    fn wrapping() {
        assert!((wrap_delta(0.9, 1.0) + 0.1).abs() < 1e-12);
        assert_eq!(wrap(-0.25, 1.0), 0.75);
        assert_eq!(wrap(-1e-18, 1.0), 0.0);
    }
}
