//! Large-`T` contour asymptotics of random projections of a thin torus.
//!
//! The visible contour length tends to `R c / sqrt(2 pi)` with
//! `c = \int\int sqrt(Var(f_rhorho / r | grad f = 0)) dphi drho`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::QuadratureSpec;
use crate::error::{Error, Result};
use crate::fields::moments::doughnut_component;
use crate::gaussian::{condition_gaussian, GaussianSpec};

/// Widely quoted closed form of the conditional Hessian covariance
/// divided by `r^2`, packed `(phiphi, phirho, rhorho)` as a full 3x3.
pub fn display_conditional_covariance(t: f64, phi: f64, rho: f64) -> [[f64; 3]; 3] {
    let (s, c) = rho.sin_cos();
    let w = t + s;
    let c4 = (4.0 * phi).cos();
    let s4 = (4.0 * phi).sin();
    let s2p = (2.0 * phi).sin();
    let a11 = 0.25 * (c4 + 3.0) * s * s * w * w;
    let a12 = 0.25 * s4 * s * s * c * w;
    let a13 = 0.25 * (c4 + 3.0) * s.powi(3) * w;
    let a22 = 0.125 * s2p * s2p * (2.0 * rho).sin().powi(2);
    let a23 = 0.25 * s4 * s.powi(3) * c;
    let a33 = display_rhorho_variance(phi, rho);
    [[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]]
}

/// `Var(f_rhorho / r)` from the same closed form.
pub fn display_rhorho_variance(phi: f64, rho: f64) -> f64 {
    let s2p = (2.0 * phi).sin();
    (((4.0 * phi).cos() + 7.0) * ((4.0 * rho).cos() + 3.0) + 8.0 * s2p * s2p * (2.0 * rho).cos()) / 32.0
}

/// Conditional covariance of the Hessian given `grad f = 0`, divided by
/// `r^2`, computed from the embedding.
pub fn conditional_covariance(big_r: f64, r: f64, phi: f64, rho: f64) -> Result<[[f64; 3]; 3]> {
    let cov = doughnut_component(big_r, r, [phi, rho]);
    let idx = [1, 2, 3, 4, 5];
    let spec = GaussianSpec::centered(cov.select_rows(&idx).select_columns(&idx))?;
    let cond = condition_gaussian(&spec, &[0, 1], &[0.0, 0.0])?;
    let m = cond.covariance();
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)] / (r * r))))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoughnutAsymptotic {
    /// `c` integrated from the closed-form `Var(f_rhorho / r)`.
    pub c_display: f64,
    /// `R c_display / sqrt(2 pi)`.
    pub length_display: f64,
    /// `c` integrated from the conditional covariance of the embedding.
    pub c_embedding: f64,
    pub length_embedding: f64,
    /// Largest entrywise gap between the closed-form and the embedding
    /// conditional covariances, relative to the largest embedding entry.
    pub max_display_discrepancy: f64,
}

/// Periodic trapezoid over `[0, 2 pi]^2` with `quad.spatial_nodes` per side.
pub fn doughnut_contour_asymptotic(big_r: f64, r: f64, quad: &QuadratureSpec) -> Result<DoughnutAsymptotic> {
    if !(big_r > r && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need R > r > 0, got R = {big_r}, r = {r}"
        )));
    }
    quad.validate()?;
    let s = quad.spatial_nodes;
    let h = 2.0 * PI / s as f64;
    let t = big_r / r;
    let (mut cd, mut ce, mut gap, mut scale) = (0.0, 0.0, 0.0f64, 0.0f64);
    for i in 0..s {
        for j in 0..s {
            let (phi, rho) = (i as f64 * h, j as f64 * h);
            let disp = display_conditional_covariance(t, phi, rho);
            let emb = conditional_covariance(big_r, r, phi, rho)?;
            cd += display_rhorho_variance(phi, rho).sqrt();
            ce += emb[2][2].max(0.0).sqrt();
            for a in 0..3 {
                for b in 0..3 {
                    gap = gap.max((disp[a][b] - emb[a][b]).abs());
                    scale = scale.max(emb[a][b].abs());
                }
            }
        }
    }
    let (cd, ce) = (cd * h * h, ce * h * h);
    let k = big_r / (2.0 * PI).sqrt();
    Ok(DoughnutAsymptotic {
        c_display: cd,
        length_display: k * cd,
        c_embedding: ce,
        length_embedding: k * ce,
        max_display_discrepancy: gap / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_integrand_is_positive() {
        for i in 0..256 {
            for j in 0..256 {
                let (p, q) = (i as f64 * PI / 128.0, j as f64 * PI / 128.0);
                assert!(display_rhorho_variance(p, q) > 0.0);
            }
        }
    }

    #[test]
    fn embedding_conditional_covariance_closed_form() {
        // Hessian given grad f = 0 is s times the second fundamental form
        let (big_r, r) = (3.0, 0.5);
        for (phi, rho) in [(0.2, 0.9), (1.7, 4.0), (3.3, 2.2)] {
            let m = conditional_covariance(big_r, r, phi, rho).unwrap();
            let w = big_r / r + f64::sin(rho);
            let s = f64::sin(rho);
            let expect = [[w * w * s * s, 0.0, w * s], [0.0, 0.0, 0.0], [w * s, 0.0, 1.0]];
            for a in 0..3 {
                for b in 0..3 {
                    assert!((m[a][b] - expect[a][b]).abs() < 1e-9 * (1.0 + w * w));
                }
            }
        }
    }

    #[test]
    fn quadrature_converged() {
        let a = doughnut_contour_asymptotic(1.0, 0.025, &QuadratureSpec::default()).unwrap();
        let b = doughnut_contour_asymptotic(
            1.0,
            0.025,
            &QuadratureSpec {
                theta_nodes: 64,
                spatial_nodes: 64,
            },
        )
        .unwrap();
        assert!((a.c_display - b.c_display).abs() < 1e-6);
        assert!((a.c_embedding - 4.0 * PI * PI).abs() < 1e-6);
    }
}
