//! Critical points of one component, classified as pseudocusps of the pair.

use serde::{Deserialize, Serialize};

use super::extract::displacement;
use super::{wrap, GridSpec};
use crate::error::Result;
use crate::fields::FieldRealization;
use crate::gaussian::sym::bordered_form;
use crate::gaussian::{index_of, SymMatrix, INDEX_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub point: [f64; 2],
    /// Hessian index, `None` when the Hessian is numerically singular.
    pub index: Option<usize>,
    /// `grad other^T H^-1 grad other < 0`; `None` when the other gradient
    /// vanishes or the form is numerically zero.
    pub sign_condition: Option<bool>,
}

impl CriticalPoint {
    pub fn is_pseudocusp(&self) -> bool {
        self.index.is_some() && self.sign_condition == Some(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudocuspCounts {
    /// Index `k = 0..=2`.
    pub vertical: Vec<u64>,
    pub horizontal: Vec<u64>,
    /// Critical points of `f` (resp. `g`) by index, sign condition dropped.
    pub candidates_vertical: Vec<u64>,
    pub candidates_horizontal: Vec<u64>,
    pub newton_failures: u64,
}

const NEWTON_STEPS: usize = 40;

/// Critical points of component `comp`; the second value counts cells
/// where Newton did not converge inside the cell.
pub fn critical_points(real: &FieldRealization, comp: usize, grid: &GridSpec) -> Result<(Vec<CriticalPoint>, u64)> {
    grid.validate()?;
    let n = grid.resolution;
    let period = real.period();
    let h = period / n as f64;
    let grads = real.grid_gradients(n, grid.origin);
    let (ux, uy) = (&grads[2 * comp], &grads[2 * comp + 1]);
    let scale = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    let own_scale = scale(ux).hypot(scale(uy));
    let other_scale = scale(&grads[2 * (1 - comp)]).hypot(scale(&grads[2 * (1 - comp) + 1]));
    let node = |i: usize, j: usize| (i % n) * n + (j % n);
    let split = |v: &[f64], i: usize, j: usize| {
        let c = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)].map(|k| v[k] >= 0.0);
        c.iter().any(|s| *s) && !c.iter().all(|s| *s)
    };
    let jet_of = |p: [f64; 2]| {
        let (jf, jg) = real.raw_jet(p);
        if comp == 0 {
            (jf, jg)
        } else {
            (jg, jf)
        }
    };

    let mut found: Vec<CriticalPoint> = Vec::new();
    let mut failures = 0;
    for i in 0..n {
        for j in 0..n {
            if !(split(ux, i, j) && split(uy, i, j)) {
                continue;
            }
            let center = [
                grid.origin[0] + (i as f64 + 0.5) * h,
                grid.origin[1] + (j as f64 + 0.5) * h,
            ];
            let mut p = center;
            let mut converged = false;
            for _ in 0..NEWTON_STEPS {
                let (u, _) = jet_of(p);
                let hm = SymMatrix::from_packed(2, vec![u[3], u[4], u[5]])?;
                let Some(step) = hm.solve(&[u[1], u[2]]) else { break };
                p = [p[0] - step[0], p[1] - step[1]];
                if step[0].hypot(step[1]) < 1e-13 * period {
                    converged = true;
                    break;
                }
            }
            let d = displacement(center, [wrap(p[0], period), wrap(p[1], period)], period);
            if !converged || d[0].abs() > h || d[1].abs() > h {
                failures += 1;
                continue;
            }
            let p = [wrap(p[0], period), wrap(p[1], period)];
            let dup = found.iter().any(|c| {
                let d = displacement(c.point, p, period);
                d[0].hypot(d[1]) < 1e-6 * period
            });
            if dup {
                continue;
            }
            let (u, w) = jet_of(p);
            if u[1].hypot(u[2]) > 1e-6 * own_scale {
                failures += 1;
                continue;
            }
            let hm = SymMatrix::from_packed(2, vec![u[3], u[4], u[5]])?;
            let index = index_of(&hm, INDEX_TOL).ok();
            let gw = [w[1], w[2]];
            let gnorm2 = gw[0] * gw[0] + gw[1] * gw[1];
            let sign_condition = match index {
                Some(_) if gnorm2.sqrt() > 1e-9 * other_scale => {
                    let q = bordered_form(&hm, &gw);
                    (q.abs() * hm.spectral_norm() > INDEX_TOL * gnorm2).then_some(q < 0.0)
                }
                _ => None,
            };
            found.push(CriticalPoint {
                point: p,
                index,
                sign_condition,
            });
        }
    }
    Ok((found, failures))
}

/// Vertical pseudocusps come from critical points of `f`, horizontal ones
/// from critical points of `g`.
pub fn count_pseudocusps(real: &FieldRealization, grid: &GridSpec) -> Result<PseudocuspCounts> {
    let mut out = PseudocuspCounts {
        vertical: vec![0; 3],
        horizontal: vec![0; 3],
        candidates_vertical: vec![0; 3],
        candidates_horizontal: vec![0; 3],
        newton_failures: 0,
    };
    for comp in 0..2 {
        let (pts, fails) = critical_points(real, comp, grid)?;
        out.newton_failures += fails;
        let (signed, all) = if comp == 0 {
            (&mut out.vertical, &mut out.candidates_vertical)
        } else {
            (&mut out.horizontal, &mut out.candidates_horizontal)
        };
        for c in pts {
            if let Some(k) = c.index {
                all[k] += 1;
                if c.sign_condition == Some(true) {
                    signed[k] += 1;
                }
            }
        }
    }
    Ok(out)
}
