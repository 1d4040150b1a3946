//! Expected lengths of the critical curve and the visible contour.
//!
//! The general route integrates over `(x, theta)` the conditional
//! expectation of the length kernel given `V(x, theta) = 0`, where
//! `V = cos(theta) grad f + sin(theta) grad g`. The i.i.d. route uses the
//! rotation invariance of `(f, g)` to remove the angle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::mc::{redraw, run_replicates, McEstimate};
use super::{LengthQuery, MomentSource, QuadratureSpec, Target};
use crate::error::{Error, Result};
use crate::gaussian::sym::packed_len;
use crate::gaussian::{
    biparametric_index, condition_gaussian, regression, GaussianSampler, GaussianSpec, SymMatrix, INDEX_TOL,
};

/// Linear map from the pair jet `(jet f, jet g)` to
/// `(V, V_theta, packed V_x)` at angle `theta`.
pub fn pencil_map(n: usize, theta: f64) -> DMatrix<f64> {
    let m = packed_len(n);
    let l = 1 + n + m;
    let (b, a) = theta.sin_cos();
    let mut p = DMatrix::zeros(2 * n + m, 2 * l);
    for i in 0..n {
        p[(i, 1 + i)] = a;
        p[(i, l + 1 + i)] = b;
        p[(n + i, 1 + i)] = -b;
        p[(n + i, l + 1 + i)] = a;
    }
    for q in 0..m {
        p[(2 * n + q, 1 + n + q)] = a;
        p[(2 * n + q, l + 1 + n + q)] = b;
    }
    p
}

/// Length kernels of one conditional draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    /// `|adj(V_x) V_theta|_G`.
    pub critical: f64,
    /// `|V_theta^T adj(V_x) V_theta|`.
    pub contour: f64,
    pub index: usize,
}

/// `None` when the draw sits on the measure-zero degenerate set.
pub fn kernel(vx: &SymMatrix, vt: &[f64], metric: &SymMatrix) -> Option<Kernel> {
    let lv = vx.adjugate().mul_vec(vt);
    let critical = metric.quad_form(&lv).sqrt();
    let contour = vt.iter().zip(&lv).map(|(a, b)| a * b).sum::<f64>().abs();
    let index = biparametric_index(vx, vt, INDEX_TOL).ok()?;
    Some(Kernel {
        critical,
        contour,
        index,
    })
}

/// Share of the node `theta = t pi / T` that belongs to the Pareto half
/// `[0, pi/2]`. The endpoints are split evenly between the two halves.
pub fn pareto_share(t: usize, nodes: usize) -> f64 {
    match (2 * t).cmp(&nodes) {
        _ if t == 0 => 0.5,
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 0.0,
    }
}

/// Output slots: per target `[total, pareto, index 0..=n, pareto index 0..=n]`.
#[derive(Clone, Copy, Debug)]
struct Layout {
    buckets: usize,
}

impl Layout {
    fn block(&self) -> usize {
        2 + 2 * self.buckets
    }

    fn len(&self) -> usize {
        2 * self.block()
    }

    fn add(&self, y: &mut [f64], k: &Kernel, weight: f64, share: f64) {
        for (t, v) in [k.critical, k.contour].into_iter().enumerate() {
            let o = t * self.block();
            let w = weight * v;
            y[o] += w;
            y[o + 1] += w * share;
            y[o + 2 + k.index] += w;
            y[o + 2 + self.buckets + k.index] += w * share;
        }
    }

    fn collect(&self, est: &[McEstimate]) -> LengthEstimates {
        let target = |t: usize| {
            let o = t * self.block();
            TargetEstimates {
                total: est[o],
                pareto: est[o + 1],
                per_index: est[o + 2..o + 2 + self.buckets].to_vec(),
                per_index_pareto: est[o + 2 + self.buckets..o + self.block()].to_vec(),
            }
        };
        LengthEstimates {
            critical: target(0),
            contour: target(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimates {
    pub total: McEstimate,
    pub pareto: McEstimate,
    /// Index `k = 0..=n`.
    pub per_index: Vec<McEstimate>,
    pub per_index_pareto: Vec<McEstimate>,
}

/// All length outputs of one paired run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimates {
    pub critical: TargetEstimates,
    pub contour: TargetEstimates,
}

impl LengthEstimates {
    pub fn target(&self, t: Target) -> &TargetEstimates {
        match t {
            Target::CriticalCurve => &self.critical,
            Target::Contour => &self.contour,
        }
    }

    pub fn select(&self, q: LengthQuery) -> Result<McEstimate> {
        let t = self.target(q.target);
        let pick = |v: &Vec<McEstimate>, k: usize| {
            v.get(k)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("index {k} out of range 0..{}", v.len())))
        };
        match (q.index_filter, q.pareto_only) {
            (None, false) => Ok(t.total),
            (None, true) => Ok(t.pareto),
            (Some(k), false) => pick(&t.per_index, k),
            (Some(k), true) => pick(&t.per_index_pareto, k),
        }
    }
}

struct ThetaNode {
    sampler: GaussianSampler,
    weight: f64,
    share: f64,
}

struct GeneralNode {
    metric: SymMatrix,
    thetas: Vec<ThetaNode>,
}

fn density_weight(n: usize, det: f64) -> Result<f64> {
    if !(det > 0.0) {
        return Err(Error::SingularObservation { min_eigenvalue: det });
    }
    Ok(1.0 / ((2.0 * PI).powi(n as i32) * det).sqrt())
}

fn symmetric(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Conditional law of `(V_theta, V_x)` given `V = 0` and the density
/// factor `1 / sqrt((2 pi)^n det Var V)`.
pub fn conditional_pencil(pair: &DMatrix<f64>, n: usize, theta: f64) -> Result<(GaussianSpec, f64)> {
    let p = pencil_map(n, theta);
    let cov = symmetric(&p * pair * p.transpose());
    let det = cov.view((0, 0), (n, n)).determinant();
    let spec = GaussianSpec::centered(cov)?;
    let observed: Vec<usize> = (0..n).collect();
    let cond = condition_gaussian(&spec, &observed, &vec![0.0; n])?;
    Ok((cond, density_weight(n, det)?))
}

fn general_nodes(src: &MomentSource, quad: &QuadratureSpec) -> Result<Vec<GeneralNode>> {
    quad.validate()?;
    let n = src.dim;
    let tn = quad.theta_nodes;
    src.nodes(quad)
        .into_iter()
        .map(|(x, wx)| {
            let mom = src.moments_at(&x)?;
            let pair = mom.pair_covariance();
            let thetas = (0..tn)
                .map(|t| {
                    let theta = t as f64 * PI / tn as f64;
                    let (cond, dens) = conditional_pencil(&pair, n, theta)?;
                    Ok(ThetaNode {
                        sampler: GaussianSampler::new(&cond),
                        weight: wx * (PI / tn as f64) * dens,
                        share: pareto_share(t, tn),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GeneralNode {
                metric: mom.metric,
                thetas,
            })
        })
        .collect()
}

fn split_draw(buf: &[f64], n: usize) -> SymMatrix {
    SymMatrix::from_packed(n, buf[n..].to_vec()).expect("packed Hessian")
}

/// Every length output of the `(x, theta)` formula from one set of draws.
pub fn length_estimates_general(
    src: &MomentSource,
    quad: &QuadratureSpec,
    mc: u64,
    seed: u64,
) -> Result<LengthEstimates> {
    let n = src.dim;
    let nodes = general_nodes(src, quad)?;
    let layout = Layout { buckets: n + 1 };
    let est = run_replicates(mc, seed, layout.len(), |rng, y| {
        let mut discarded = 0;
        let mut buf = vec![0.0; n + packed_len(n)];
        for node in &nodes {
            for th in &node.thetas {
                let k = redraw(rng, &mut discarded, |r| {
                    th.sampler.sample_into(r, &mut buf);
                    kernel(&split_draw(&buf, n), &buf[..n], &node.metric)
                })?;
                layout.add(y, &k, th.weight, th.share);
            }
        }
        Ok(discarded)
    })?;
    Ok(layout.collect(&est))
}

pub fn expected_length_general(
    src: &MomentSource,
    quad: &QuadratureSpec,
    query: LengthQuery,
    mc: u64,
    seed: u64,
) -> Result<McEstimate> {
    length_estimates_general(src, quad, mc, seed)?.select(query)
}

/// Unweighted critical-curve integrand at one chart point for every
/// `theta` node.
pub fn theta_profile(
    src: &MomentSource,
    x: &[f64],
    quad: &QuadratureSpec,
    mc: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    quad.validate()?;
    let n = src.dim;
    let tn = quad.theta_nodes;
    let mom = src.moments_at(x)?;
    let pair = mom.pair_covariance();
    let nodes = (0..tn)
        .map(|t| {
            let (cond, dens) = conditional_pencil(&pair, n, t as f64 * PI / tn as f64)?;
            Ok((GaussianSampler::new(&cond), dens))
        })
        .collect::<Result<Vec<_>>>()?;
    run_replicates(mc, seed, tn, |rng, y| {
        let mut discarded = 0;
        let mut buf = vec![0.0; n + packed_len(n)];
        for (t, (sampler, dens)) in nodes.iter().enumerate() {
            let k = redraw(rng, &mut discarded, |r| {
                sampler.sample_into(r, &mut buf);
                kernel(&split_draw(&buf, n), &buf[..n], &mom.metric)
            })?;
            y[t] = k.critical * dens;
        }
        Ok(discarded)
    })
}

struct IidNode {
    grad: GaussianSampler,
    hess: GaussianSampler,
    metric: SymMatrix,
    weight: f64,
}

fn iid_nodes(src: &MomentSource, quad: &QuadratureSpec) -> Result<Vec<IidNode>> {
    quad.validate()?;
    let n = src.dim;
    src.nodes(quad)
        .into_iter()
        .map(|(x, wx)| {
            let mom = src.moments_at(&x)?;
            if !mom.is_iid() {
                return Err(Error::InvalidParameter(
                    "the i.i.d. route needs independent, identically distributed components".into(),
                ));
            }
            // jet without the value: (grad, packed Hessian)
            let l = mom.jet_len();
            let idx: Vec<usize> = (1..l).collect();
            let jet = GaussianSpec::centered(mom.component.select_rows(&idx).select_columns(&idx))?;
            let grad = jet.marginal(&(0..n).collect::<Vec<_>>());
            let reg = regression(&jet, &(0..n).collect::<Vec<_>>())?;
            let resid = GaussianSpec::centered(reg.residual)?;
            let det = grad.covariance().determinant();
            Ok(IidNode {
                grad: GaussianSampler::new(&grad),
                hess: GaussianSampler::new(&resid),
                metric: mom.metric,
                weight: wx * PI * density_weight(n, det)?,
            })
        })
        .collect()
}

/// Every length output of the angle-free i.i.d. formula. The Pareto half
/// is exactly half of each total for such maps.
pub fn length_estimates_iid(src: &MomentSource, quad: &QuadratureSpec, mc: u64, seed: u64) -> Result<LengthEstimates> {
    let n = src.dim;
    let nodes = iid_nodes(src, quad)?;
    let layout = Layout { buckets: n + 1 };
    let est = run_replicates(mc, seed, layout.len(), |rng, y| {
        let mut discarded = 0;
        let mut z = vec![0.0; n];
        let mut h = vec![0.0; packed_len(n)];
        for node in &nodes {
            let k = redraw(rng, &mut discarded, |r| {
                node.grad.sample_into(r, &mut z);
                node.hess.sample_into(r, &mut h);
                let hm = SymMatrix::from_packed(n, h.clone()).expect("packed Hessian");
                kernel(&hm, &z, &node.metric)
            })?;
            layout.add(y, &k, node.weight, 0.5);
        }
        Ok(discarded)
    })?;
    Ok(layout.collect(&est))
}

pub fn expected_length_iid(
    src: &MomentSource,
    quad: &QuadratureSpec,
    query: LengthQuery,
    mc: u64,
    seed: u64,
) -> Result<McEstimate> {
    length_estimates_iid(src, quad, mc, seed)?.select(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldModel;
    use crate::gaussian::{GaussianSampler, RngStream};

    #[test]
    fn pareto_shares() {
        let s: Vec<f64> = (0..8).map(|t| pareto_share(t, 8)).collect();
        assert_eq!(s, vec![0.5, 1.0, 1.0, 1.0, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(s.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn kernel_is_symmetric_under_half_turn() {
        // integrand at theta and theta + pi from the same pair jet
        let m = crate::fields::model_moments(FieldModel::BandlimitedTorus { k: 2 }, &[0.0, 0.0]).unwrap();
        let sampler = GaussianSampler::new(&GaussianSpec::centered(m.pair_covariance()).unwrap());
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..200 {
            let jets = sampler.sample(&mut rng);
            let theta = 1.234;
            let eval = |th: f64| {
                let v = pencil_map(2, th) * &jets;
                let vx = SymMatrix::from_packed(2, vec![v[4], v[5], v[6]]).unwrap();
                let vt = [v[2], v[3]];
                let lv = vx.adjugate().mul_vec(&vt);
                (lv[0].hypot(lv[1]), (vt[0] * lv[0] + vt[1] * lv[1]).abs())
            };
            let (a, b) = (eval(theta), eval(theta + PI));
            assert!((a.0 - b.0).abs() <= 1e-12 * a.0.max(1.0));
            assert!((a.1 - b.1).abs() <= 1e-12 * a.1.max(1.0));
        }
    }

    #[test]
    fn iid_route_partitions_pathwise() {
        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 3 }).unwrap();
        let est = length_estimates_iid(&src, &QuadratureSpec::default(), 4000, 9).unwrap();
        for t in [&est.critical, &est.contour] {
            let sum: f64 = t.per_index.iter().map(|e| e.mean).sum();
            assert!((sum - t.total.mean).abs() < 1e-9 * t.total.mean);
            assert!((t.pareto.mean - 0.5 * t.total.mean).abs() < 1e-12 * t.total.mean);
        }
        // index 2 is impossible for a bordered form in two dimensions
        assert_eq!(est.critical.per_index[2].mean, 0.0);
    }

    #[test]
    fn general_route_pareto_decomposition_is_exact() {
        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 2 }).unwrap();
        let quad = QuadratureSpec {
            theta_nodes: 16,
            spatial_nodes: 8,
        };
        let est = length_estimates_general(&src, &quad, 500, 4).unwrap();
        for t in [&est.critical, &est.contour] {
            let anti: f64 = t
                .per_index
                .iter()
                .zip(&t.per_index_pareto)
                .map(|(a, p)| a.mean - p.mean)
                .sum();
            assert!((t.pareto.mean + anti - t.total.mean).abs() < 1e-9 * t.total.mean);
        }
    }

    #[test]
    fn iid_route_rejects_correlated_components() {
        let src = MomentSource::custom(2, super::super::Chart::PeriodicBox { period: 1.0 }, true, |x| {
            let mut m = crate::fields::model_moments(FieldModel::BandlimitedTorus { k: 2 }, x)?;
            m.cross = Some(m.component.clone() * 0.5);
            Ok(m)
        })
        .unwrap();
        assert!(length_estimates_iid(&src, &QuadratureSpec::default(), 10, 1).is_err());
        // the general route accepts them
        let quad = QuadratureSpec {
            theta_nodes: 8,
            spatial_nodes: 8,
        };
        assert!(length_estimates_general(&src, &quad, 10, 1).is_ok());
    }
}
