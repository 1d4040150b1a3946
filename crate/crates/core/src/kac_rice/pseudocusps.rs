//! Expected numbers of pseudocusps.
//!
//! A vertical pseudocusp of index `k` is a critical point of `f` with
//! `ind(H_f) = k` and `grad g^T H_f^-1 grad g < 0`; horizontal ones swap
//! `f` and `g`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::mc::{redraw, run_replicates, McEstimate};
use super::{MomentSource, QuadratureSpec};
use crate::error::{Error, Result};
use crate::gaussian::sym::{bordered_form, packed_len};
use crate::gaussian::{condition_gaussian, index_of, GaussianSampler, GaussianSpec, SymMatrix, INDEX_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PseudocuspKind {
    Vertical,
    Horizontal,
}

/// Per-index expectations; the `candidates_*` arrays drop the sign
/// condition and so count critical points of one component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudocuspEstimates {
    pub vertical: Vec<McEstimate>,
    pub horizontal: Vec<McEstimate>,
    pub candidates_vertical: Vec<McEstimate>,
    pub candidates_horizontal: Vec<McEstimate>,
}

impl PseudocuspEstimates {
    pub fn of(&self, kind: PseudocuspKind) -> &[McEstimate] {
        match kind {
            PseudocuspKind::Vertical => &self.vertical,
            PseudocuspKind::Horizontal => &self.horizontal,
        }
    }
}

struct Node {
    /// Conditional law of `(H_f, grad g)` given `grad f = 0`, and of
    /// `(H_g, grad f)` given `grad g = 0`.
    laws: [GaussianSampler; 2],
    weight: [f64; 2],
}

fn conditional(pair: &DMatrix<f64>, n: usize, own: usize, other: usize) -> Result<(GaussianSampler, f64)> {
    let m = packed_len(n);
    let mut idx: Vec<usize> = (own + 1..own + 1 + n).collect();
    idx.extend(own + 1 + n..own + 1 + n + m);
    idx.extend(other + 1..other + 1 + n);
    let joint = GaussianSpec::centered(pair.select_rows(&idx).select_columns(&idx))?;
    let det = joint.covariance().view((0, 0), (n, n)).determinant();
    if !(det > 0.0) {
        return Err(Error::SingularObservation { min_eigenvalue: det });
    }
    let cond = condition_gaussian(&joint, &(0..n).collect::<Vec<_>>(), &vec![0.0; n])?;
    Ok((
        GaussianSampler::new(&cond),
        1.0 / ((2.0 * PI).powi(n as i32) * det).sqrt(),
    ))
}

fn nodes(src: &MomentSource, quad: &QuadratureSpec) -> Result<Vec<Node>> {
    quad.validate()?;
    let n = src.dim;
    let l = 1 + n + packed_len(n);
    src.nodes(quad)
        .into_iter()
        .map(|(x, wx)| {
            let pair = src.moments_at(&x)?.pair_covariance();
            let (sv, dv) = conditional(&pair, n, 0, l)?;
            let (sh, dh) = conditional(&pair, n, l, 0)?;
            Ok(Node {
                laws: [sv, sh],
                weight: [wx * dv, wx * dh],
            })
        })
        .collect()
}

/// Every pseudocusp expectation from one set of draws. Vertical and
/// horizontal draws are independent.
pub fn pseudocusp_estimates(
    src: &MomentSource,
    quad: &QuadratureSpec,
    mc: u64,
    seed: u64,
) -> Result<PseudocuspEstimates> {
    let n = src.dim;
    let m = packed_len(n);
    let b = n + 1;
    let nodes = nodes(src, quad)?;
    let est = run_replicates(mc, seed, 4 * b, |rng, y| {
        let mut discarded = 0;
        let mut buf = vec![0.0; m + n];
        for node in &nodes {
            for side in 0..2 {
                let (h, k, sign) = redraw(rng, &mut discarded, |r| {
                    node.laws[side].sample_into(r, &mut buf);
                    let h = SymMatrix::from_packed(n, buf[..m].to_vec()).ok()?;
                    let k = index_of(&h, INDEX_TOL).ok()?;
                    let q = bordered_form(&h, &buf[m..]);
                    q.is_finite().then_some((h, k, q < 0.0))
                })?;
                let v = node.weight[side] * h.det().abs();
                y[2 * b + side * b + k] += v;
                if sign {
                    y[side * b + k] += v;
                }
            }
        }
        Ok(discarded)
    })?;
    Ok(PseudocuspEstimates {
        vertical: est[..b].to_vec(),
        horizontal: est[b..2 * b].to_vec(),
        candidates_vertical: est[2 * b..3 * b].to_vec(),
        candidates_horizontal: est[3 * b..].to_vec(),
    })
}

pub fn expected_pseudocusps(
    src: &MomentSource,
    quad: &QuadratureSpec,
    k: usize,
    kind: PseudocuspKind,
    mc: u64,
    seed: u64,
) -> Result<McEstimate> {
    if k > src.dim {
        return Err(Error::InvalidParameter(format!(
            "index {k} out of range 0..={}",
            src.dim
        )));
    }
    Ok(pseudocusp_estimates(src, quad, mc, seed)?.of(kind)[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldModel;

    #[test]
    fn exchangeable_and_bounded_by_critical_points() {
        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 3 }).unwrap();
        let est = pseudocusp_estimates(&src, &QuadratureSpec::default(), 40_000, 2).unwrap();
        // a minimum cannot be a pseudocusp: H^-1 is positive definite
        assert_eq!(est.vertical[0].mean, 0.0);
        assert_eq!(est.horizontal[0].mean, 0.0);
        for k in 1..3 {
            assert!(est.vertical[k].z_distance(&est.horizontal[k]) < 3.5);
        }
        let signed: f64 = est.vertical.iter().map(|e| e.mean).sum();
        let all: f64 = est.candidates_vertical.iter().map(|e| e.mean).sum();
        assert!(signed < all);
        // a torus field has as many saddles as extrema on average
        let extrema = est.candidates_vertical[0].mean + est.candidates_vertical[2].mean;
        let saddles = est.candidates_vertical[1].mean;
        assert!((extrema - saddles).abs() < 0.05 * saddles);
    }

    #[test]
    fn stationary_critical_point_density() {
        // E #crit of f on the unit torus = E|det H| / (2 pi sqrt(det Var grad f))
        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 2 }).unwrap();
        let est = pseudocusp_estimates(&src, &QuadratureSpec::default(), 20_000, 8).unwrap();
        let total: f64 = est.candidates_vertical.iter().map(|e| e.mean).sum();
        let mom = src.moments_at(&[0.0, 0.0]).unwrap();
        let vg = mom.var_grad().det();
        let h = GaussianSampler::new(&GaussianSpec::centered(mom.var_hess()).unwrap());
        let oracle = run_replicates(20_000, 9, 1, |rng, y| {
            let mut p = [0.0; 3];
            h.sample_into(rng, &mut p);
            y[0] = (p[0] * p[2] - p[1] * p[1]).abs() / (2.0 * PI * vg.sqrt());
            Ok(0)
        })
        .unwrap()[0];
        let se: f64 = est
            .candidates_vertical
            .iter()
            .map(|e| e.stderr * e.stderr)
            .sum::<f64>()
            .sqrt();
        assert!((total - oracle.mean).abs() < 4.0 * se.hypot(oracle.stderr));
    }
}
