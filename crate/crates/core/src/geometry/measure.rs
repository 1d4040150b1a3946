//! Lengths of the critical curve and the visible contour, split by index
//! and by the Pareto half `theta in [0, pi/2]`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use super::extract::{displacement, Extraction, PolyVertex, SingularPolyline};
use super::pseudocusps::{count_pseudocusps, PseudocuspCounts};
use super::{lift, pencil, wrap, wrap_delta, GridSpec};
use crate::error::Result;
use crate::fields::{FieldRealization, Jet2, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub schema_version: u32,
    /// Length under the chart metric `G`.
    pub critical_length: f64,
    /// Euclidean length of the image in the plane.
    pub contour_length: f64,
    /// Index `k = 0..=2`.
    pub per_index_critical: Vec<f64>,
    pub per_index_contour: Vec<f64>,
    /// Segments where no index could be assigned.
    pub unattributed_critical: f64,
    pub unattributed_contour: f64,
    pub pareto_critical: f64,
    pub pareto_contour: f64,
    pub segments: usize,
    pub pseudocusp_counts: Option<PseudocuspCounts>,
}

fn midpoint(a: &PolyVertex, b: &PolyVertex, period: f64) -> [f64; 2] {
    let d = displacement(a.point, b.point, period);
    [
        wrap(a.point[0] + 0.5 * d[0], period),
        wrap(a.point[1] + 0.5 * d[1], period),
    ]
}

/// Mean of two angles of period `pi`.
fn mean_angle(a: f64, b: f64) -> f64 {
    let (s, c) = ((2.0 * a).sin() + (2.0 * b).sin(), (2.0 * a).cos() + (2.0 * b).cos());
    (0.5 * s.atan2(c)).rem_euclid(PI)
}

fn metric_length(jet: &Jet2, d: [f64; 2]) -> f64 {
    jet.metric.quad_form(&d).max(0.0).sqrt()
}

struct SegmentAttrs {
    jet: Jet2,
    theta: Option<f64>,
    index: Option<usize>,
}

fn segment_attrs(real: &FieldRealization, a: &PolyVertex, b: &PolyVertex, period: f64, scale: f64) -> SegmentAttrs {
    let jet = real.eval_jet(midpoint(a, b, period));
    let (mid_theta, mid_index) = lift(&jet, scale);
    let theta = match (a.theta, b.theta) {
        (Some(x), Some(y)) => Some(mean_angle(x, y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => mid_theta,
    };
    SegmentAttrs {
        jet,
        theta,
        index: mid_index.or(a.index).or(b.index),
    }
}

/// Lengths without pseudocusp counts.
pub fn measure_lengths(real: &FieldRealization, ex: &Extraction) -> LengthReport {
    let period = ex.period;
    let mut r = LengthReport {
        schema_version: SCHEMA_VERSION,
        critical_length: 0.0,
        contour_length: 0.0,
        per_index_critical: vec![0.0; 3],
        per_index_contour: vec![0.0; 3],
        unattributed_critical: 0.0,
        unattributed_contour: 0.0,
        pareto_critical: 0.0,
        pareto_contour: 0.0,
        segments: 0,
        pseudocusp_counts: None,
    };
    for poly in &ex.polylines {
        for (a, b) in poly.segments() {
            let at = segment_attrs(real, a, b, period, ex.gradient_scale);
            let lc = metric_length(&at.jet, displacement(a.point, b.point, period));
            let lk = (b.contour_point[0] - a.contour_point[0]).hypot(b.contour_point[1] - a.contour_point[1]);
            r.critical_length += lc;
            r.contour_length += lk;
            r.segments += 1;
            match at.index {
                Some(k) => {
                    r.per_index_critical[k] += lc;
                    r.per_index_contour[k] += lk;
                }
                None => {
                    r.unattributed_critical += lc;
                    r.unattributed_contour += lk;
                }
            }
            if at.theta.is_some_and(|t| t <= FRAC_PI_2) {
                r.pareto_critical += lc;
                r.pareto_contour += lk;
            }
        }
    }
    r
}

/// Lengths and pseudocusp counts of one realization.
pub fn measure(real: &FieldRealization, ex: &Extraction, grid: &GridSpec) -> Result<LengthReport> {
    let mut r = measure_lengths(real, ex);
    r.pseudocusp_counts = Some(count_pseudocusps(real, grid)?);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleLengths {
    pub critical_length: f64,
    pub contour_length: f64,
    /// Share of segments whose pencil Hessian is numerically singular; these
    /// enter through the limiting form of the weights.
    pub cusp_like_fraction: f64,
    pub flagged: bool,
}

/// Largest angle step of one quadrature piece along the lifted curve.
const MAX_THETA_STEP: f64 = 0.01;

/// Angle jump above which a segment is integrated as move, turn, move.
const SWEEP_THRESHOLD: f64 = 0.1;

/// Lengths as weighted integrals over the lifted curve `(x, theta)` with
/// its Euclidean arc length. The two lifts `theta` and `theta + pi` carry
/// equal weights, which cancels the factor one half of the double cover.
/// Each segment is integrated with a composite midpoint rule in which `x`
/// and `theta` move linearly; pieces never exceed [`MAX_THETA_STEP`].
/// Segments whose angle jumps by more than [`SWEEP_THRESHOLD`] straddle a
/// point where the lift is vertical and are split into a move, a turn at
/// fixed `x` and a second move.
pub fn lemma_length_oracle(real: &FieldRealization, polylines: &[SingularPolyline]) -> OracleLengths {
    let period = real.period();
    let scale = {
        let mut acc = 0.0;
        let mut cnt = 0usize;
        for v in polylines.iter().flat_map(|p| p.vertices.iter()) {
            let j = real.eval_jet(v.point);
            acc += j.grad_f[0].powi(2) + j.grad_f[1].powi(2) + j.grad_g[0].powi(2) + j.grad_g[1].powi(2);
            cnt += 1;
        }
        (acc / cnt.max(1) as f64).sqrt()
    };
    let (mut crit, mut cont) = (0.0, 0.0);
    let (mut cusp_like, mut total) = (0usize, 0usize);
    for poly in polylines {
        for (a, b) in poly.segments() {
            total += 1;
            let dx = displacement(a.point, b.point, period);
            let fallback = || lift(&real.eval_jet(midpoint(a, b, period)), scale).0;
            let (ta, tb) = match (a.theta, b.theta) {
                (Some(x), Some(y)) => (x, y),
                (Some(x), None) => (x, fallback().unwrap_or(x)),
                (None, Some(y)) => (fallback().unwrap_or(y), y),
                (None, None) => match fallback() {
                    Some(t) => (t, t),
                    None => continue,
                },
            };
            let dtheta = wrap_delta(tb - ta, PI);
            let mut singular = false;
            let mut add = |x0: [f64; 2], dx: [f64; 2], t0: f64, dt: f64| {
                let dl = (dx[0] * dx[0] + dx[1] * dx[1] + dt * dt).sqrt();
                let pieces = ((dt.abs() / MAX_THETA_STEP).ceil() as usize).max(1);
                for q in 0..pieces {
                    let s = (q as f64 + 0.5) / pieces as f64;
                    let x = [wrap(x0[0] + s * dx[0], period), wrap(x0[1] + s * dx[1], period)];
                    let jet = real.eval_jet(x);
                    let (vx, vt) = pencil(&jet, t0 + s * dt);
                    let lv = vx.adjugate().mul_vec(&vt);
                    let det = vx.det();
                    let denom = (det * det + lv[0] * lv[0] + lv[1] * lv[1]).sqrt();
                    if denom == 0.0 {
                        singular = true;
                        continue;
                    }
                    if det.abs() <= 1e-8 * vx.spectral_norm().powi(2) {
                        singular = true;
                    }
                    let w = dl / pieces as f64 / denom;
                    crit += jet.metric.quad_form(&lv).max(0.0).sqrt() * w;
                    cont += (vt[0] * lv[0] + vt[1] * lv[1]).abs() * w;
                }
            };
            if dtheta.abs() <= SWEEP_THRESHOLD {
                add(a.point, dx, ta, dtheta);
            } else {
                // the lift turns at a point where both gradients nearly vanish
                let half = [0.5 * dx[0], 0.5 * dx[1]];
                let m = [a.point[0] + half[0], a.point[1] + half[1]];
                add(a.point, half, ta, 0.0);
                add(m, [0.0, 0.0], ta, dtheta);
                add(m, half, tb, 0.0);
            }
            cusp_like += usize::from(singular);
        }
    }
    let frac = cusp_like as f64 / total.max(1) as f64;
    OracleLengths {
        critical_length: crit,
        contour_length: cont,
        cusp_like_fraction: frac,
        flagged: frac > 0.01,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_mean_wraps() {
        assert!((mean_angle(0.1, PI - 0.1) - 0.0).abs() < 1e-12 || (mean_angle(0.1, PI - 0.1) - PI).abs() < 1e-12);
        assert!((mean_angle(0.2, 0.4) - 0.3).abs() < 1e-12);
    }
}
