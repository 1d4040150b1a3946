//! Joint covariances of 2-jets.
//!
//! A component jet is ordered `(f, grad f, packed Hessian)`, so for `n = 2`
//! it is `(f, f_x, f_y, f_xx, f_xy, f_yy)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{doughnut, FieldModel};
use crate::error::{Error, Result};
use crate::gaussian::sym::packed_len;
use crate::gaussian::{goi_covariance, GoiParams, SymMatrix, TOL_PSD};

/// Jet covariance at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetMoments {
    pub dim: usize,
    /// Covariance of one component's jet.
    pub component: DMatrix<f64>,
    /// `Cov(jet f, jet g)`; `None` when the components are independent and
    /// identically distributed.
    pub cross: Option<DMatrix<f64>>,
    pub metric: SymMatrix,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
}

impl JetMoments {
    pub fn iid(dim: usize, component: DMatrix<f64>, metric: SymMatrix) -> Result<Self> {
        let len = 1 + dim + packed_len(dim);
        if component.nrows() != len || component.ncols() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: component.nrows(),
            });
        }
        if metric.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: metric.dim(),
            });
        }
        Ok(Self {
            dim,
            component,
            cross: None,
            metric,
            eta: None,
            kappa: None,
        })
    }

    pub fn jet_len(&self) -> usize {
        1 + self.dim + packed_len(self.dim)
    }

    pub fn grad_range(&self) -> std::ops::Range<usize> {
        1..1 + self.dim
    }

    pub fn hess_range(&self) -> std::ops::Range<usize> {
        1 + self.dim..self.jet_len()
    }

    pub fn is_iid(&self) -> bool {
        self.cross.is_none()
    }

    pub fn var_grad(&self) -> SymMatrix {
        let o = 1;
        SymMatrix::from_fn(self.dim, |i, j| self.component[(o + i, o + j)])
    }

    /// Covariance of the packed Hessian entries.
    pub fn var_hess(&self) -> DMatrix<f64> {
        let r = self.hess_range();
        self.component.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    /// `Cov(grad f, packed Hessian of f)`.
    pub fn cross_cov(&self) -> DMatrix<f64> {
        let g = self.grad_range();
        let h = self.hess_range();
        self.component.view((g.start, h.start), (g.len(), h.len())).into_owned()
    }

    /// Covariance of `(jet f, jet g)`.
    pub fn pair_covariance(&self) -> DMatrix<f64> {
        let l = self.jet_len();
        let mut m = DMatrix::zeros(2 * l, 2 * l);
        m.view_mut((0, 0), (l, l)).copy_from(&self.component);
        m.view_mut((l, l), (l, l)).copy_from(&self.component);
        if let Some(c) = &self.cross {
            m.view_mut((0, l), (l, l)).copy_from(c);
            m.view_mut((l, 0), (l, l)).copy_from(&c.transpose());
        }
        m
    }
}

/// Symbol of a derivative acting on `exp(2 pi i (m x + n y))`, for the jet
/// entry `slot` in `(1, d_x, d_y, d_xx, d_xy, d_yy)`.
fn symbol(slot: usize, m: f64, n: f64) -> (f64, f64) {
    let w = 2.0 * PI;
    match slot {
        0 => (1.0, 0.0),
        1 => (0.0, w * m),
        2 => (0.0, w * n),
        3 => (-w * w * m * m, 0.0),
        4 => (-w * w * m * n, 0.0),
        5 => (-w * w * n * n, 0.0),
        _ => unreachable!(),
    }
}

/// Exact lattice sums `sum p_a(m, n) conj(p_b(m, n))` over `|m|, |n| <= K`.
pub fn bandlimited_component(k: usize) -> DMatrix<f64> {
    let ki = k as i64;
    let mut cov = DMatrix::zeros(6, 6);
    for m in -ki..=ki {
        for n in -ki..=ki {
            let (mf, nf) = (m as f64, n as f64);
            for a in 0..6 {
                let (ar, ai) = symbol(a, mf, nf);
                for b in 0..6 {
                    let (br, bi) = symbol(b, mf, nf);
                    // real part of p_a conj(p_b); imaginary parts cancel
                    cov[(a, b)] += ar * br + ai * bi;
                }
            }
        }
    }
    cov
}

/// Gram matrix of the embedding jet: the covariance of `v . E` with
/// standard normal `v`.
pub fn doughnut_component(big_r: f64, r: f64, point: [f64; 2]) -> DMatrix<f64> {
    let e = doughnut::embedding_jet(big_r, r, point[0], point[1]);
    DMatrix::from_fn(6, 6, |a, b| e[a][0] * e[b][0] + e[a][1] * e[b][1] + e[a][2] * e[b][2])
}

/// Unit-variance isotropic field: gradient `sqrt(C') Z`, Hessian
/// `sqrt(2 C'')` times a GOI((1 + eta^2)/2) matrix, mutually independent.
/// The value block is unit variance and uncorrelated with the derivatives;
/// no evaluator reads it.
pub fn sphere_component(n: usize, c_prime: f64, c_double_prime: f64) -> Result<DMatrix<f64>> {
    let eta2 = c_prime / c_double_prime;
    let m = packed_len(n);
    let goi = goi_covariance(GoiParams::new(n, (1.0 + eta2) / 2.0)?);
    let mut cov = DMatrix::zeros(1 + n + m, 1 + n + m);
    cov[(0, 0)] = 1.0;
    for i in 0..n {
        cov[(1 + i, 1 + i)] = c_prime;
    }
    cov.view_mut((1 + n, 1 + n), (m, m))
        .copy_from(&(goi * (2.0 * c_double_prime)));
    Ok(cov)
}

/// Analytic jet moments of `model` at `point` (ignored for stationary
/// models). Fails when the gradient covariance is singular.
pub fn model_moments(model: FieldModel, point: &[f64]) -> Result<JetMoments> {
    model.validate()?;
    let moments = match model {
        FieldModel::BandlimitedTorus { k } => JetMoments::iid(2, bandlimited_component(k), SymMatrix::identity(2))?,
        FieldModel::DoughnutProjection { big_r, small_r } => {
            let p = [point[0], point[1]];
            let g = doughnut::metric(big_r, small_r, p[1]);
            JetMoments::iid(
                2,
                doughnut_component(big_r, small_r, p),
                SymMatrix::from_packed(2, g.to_vec())?,
            )?
        }
        FieldModel::IsotropicSphere {
            n,
            c_prime,
            c_double_prime,
        } => {
            let mut m = JetMoments::iid(n, sphere_component(n, c_prime, c_double_prime)?, SymMatrix::identity(n))?;
            m.eta = Some(c_prime.sqrt() / c_double_prime.sqrt());
            m.kappa = Some(c_prime / c_double_prime.sqrt());
            m
        }
    };
    let ev = moments.var_grad().eigenvalues();
    if !(ev[0] > TOL_PSD * ev[ev.len() - 1]) {
        return Err(Error::InvalidParameter(format!(
            "gradient covariance is singular (smallest eigenvalue {})",
            ev[0]
        )));
    }
    Ok(moments)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointCheck {
    pub point: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub model: FieldModel,
    /// Relative threshold on `min / max` eigenvalue.
    pub tolerance: f64,
    pub points: Vec<PointCheck>,
    pub all_pass: bool,
    pub worst_ratio: f64,
}

/// Smallest eigenvalue of the joint covariance of
/// `(f, g, grad f, grad g, Hess f, Hess g)` at each point.
pub fn validate_nondegeneracy(model: FieldModel, points: &[Vec<f64>]) -> NondegeneracyReport {
    let tolerance = 1e-10;
    let mut checks = Vec::with_capacity(points.len());
    for p in points {
        let component = match model {
            FieldModel::BandlimitedTorus { k } => Ok(bandlimited_component(k)),
            FieldModel::DoughnutProjection { big_r, small_r } => Ok(doughnut_component(big_r, small_r, [p[0], p[1]])),
            FieldModel::IsotropicSphere {
                n,
                c_prime,
                c_double_prime,
            } => sphere_component(n, c_prime, c_double_prime),
        };
        let (min, max) = match component {
            Ok(c) => {
                // independent components: the joint spectrum is that of one block
                let ev = SymmetricEigen::new(c).eigenvalues;
                (ev.min(), ev.max())
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        checks.push(PointCheck {
            point: p.clone(),
            min_eigenvalue: min,
            max_eigenvalue: max,
            pass: min > tolerance * max,
        });
    }
    let worst_ratio = checks
        .iter()
        .map(|c| c.min_eigenvalue / c.max_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    NondegeneracyReport {
        model,
        tolerance,
        all_pass: checks.iter().all(|c| c.pass),
        points: checks,
        worst_ratio,
    }
}
